//! Transfer-function synthesis: feasible modes, guards and updates, each
//! driven by incremental SAT queries over the block encoding.

pub mod guards;
pub mod modes;
pub mod updates;

use crate::affine::{AffineError, AffineSpace};
use crate::encoder::{encode_block, input_name, BlockEncoding, Builder, EncodeError, VarMap};
use crate::isa::{Block, ModeVector, Reg};
use crate::sat::{Backend, Lit, SatError, Session};
use crate::template::{Pattern, TemplateError, TemplateSet};
use crate::tf::{Domain, Pair, TransferFunction};
use rayon::prelude::*;
use serde::Serialize;

pub use guards::{drop_redundant, max_linear, max_linear_guided};
use guards::synth_guard;
pub use modes::{feasible_modes, feasible_modes_flat};
pub use updates::{lift_interval, Strategy};

/// Default cap on the number of feasible mode vectors.
pub const DEFAULT_MODE_CAP: usize = 4096;

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Sat(#[from] SatError),
    #[error(transparent)]
    Affine(#[from] AffineError),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error("more than {0} feasible mode vectors")]
    TooManyModes(usize),
    #[error("{0}")]
    Config(String),
}

impl SynthError {
    /// Resource limits (conflict budget, mode cap) as opposed to bad input.
    pub fn is_resource_limit(&self) -> bool {
        matches!(self, SynthError::TooManyModes(_) | SynthError::Sat(SatError::Budget(_)))
    }
}

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub domain: Domain,
    pub strategy: Strategy,
    /// Guard patterns; `None` uses the update templates.
    pub guard_templates: Option<Vec<Pattern>>,
    /// Products of tracked registers made available to affine relations.
    pub monomials: Vec<Vec<Reg>>,
    /// Remove guard rows implied by the others.
    pub drop_redundant: bool,
    pub backend: Backend,
    pub conflict_budget: Option<u64>,
    pub mode_cap: usize,
    pub parallel: bool,
    /// Restrict synthesis to these mode vectors (letter strings, e.g. "PP").
    pub only_modes: Option<Vec<String>>,
}

impl Default for SynthConfig {
    fn default() -> SynthConfig {
        SynthConfig {
            domain: Domain::Octagon,
            strategy: Strategy::Ladder,
            guard_templates: None,
            monomials: Vec::new(),
            drop_redundant: false,
            backend: Backend::Internal,
            conflict_budget: None,
            mode_cap: DEFAULT_MODE_CAP,
            parallel: true,
            only_modes: None,
        }
    }
}

/// SAT calls per phase for one pair.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PairStats {
    pub modes: String,
    pub guard_calls: u64,
    pub affine_calls: u64,
    pub update_calls: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SynthStats {
    pub mode_calls: u64,
    pub pairs: Vec<PairStats>,
}

impl SynthStats {
    pub fn guard_calls(&self) -> u64 {
        self.pairs.iter().map(|p| p.guard_calls).sum()
    }

    pub fn total_calls(&self) -> u64 {
        self.mode_calls + self.pairs.iter().map(|p| p.guard_calls + p.affine_calls + p.update_calls).sum::<u64>()
    }
}

#[derive(Debug, Clone)]
pub struct Synthesis {
    pub tf: TransferFunction,
    pub stats: SynthStats,
}

/// Per-mode query state: a private copy of the encoding plus a session.
#[derive(Clone)]
pub(crate) struct ModeCtx<'a> {
    pub cfg: &'a SynthConfig,
    pub b: Builder,
    pub vars: VarMap,
    pub session: Session,
    pub mode: Vec<Lit>,
    pub regs: Vec<Reg>,
    pub width: usize,
}

impl ModeCtx<'_> {
    pub fn sync(&mut self) {
        self.session.sync(&self.b.cnf);
    }

    pub fn input_names(&self) -> Vec<String> {
        self.regs.iter().map(|&r| input_name(r)).collect()
    }

    pub fn output_names(&self) -> Vec<String> {
        self.regs.iter().map(|&r| crate::encoder::output_name(r)).collect()
    }
}

pub(crate) fn new_session(cfg: &SynthConfig, b: &Builder) -> Session {
    let mut s = Session::with_backend(&b.cnf, cfg.backend.clone());
    s.set_conflict_budget(cfg.conflict_budget);
    s
}

pub fn update_templates(domain: Domain, n: usize) -> TemplateSet {
    match domain {
        Domain::Interval => TemplateSet::interval(n),
        Domain::Octagon => TemplateSet::octagon(n),
    }
}

fn monomial_indices(regs: &[Reg], monomials: &[Vec<Reg>]) -> Result<Vec<Vec<usize>>, SynthError> {
    monomials
        .iter()
        .map(|m| {
            if m.len() < 2 {
                return Err(SynthError::Config("a monomial needs at least two factors".into()));
            }
            m.iter()
                .map(|r| {
                    regs.iter()
                        .position(|x| x == r)
                        .ok_or_else(|| SynthError::Config(format!("monomial factor R{r} is not a tracked register")))
                })
                .collect()
        })
        .collect()
}

fn mode_ctx<'a>(enc: &BlockEncoding, cfg: &'a SynthConfig, regs: &[Reg], mv: &ModeVector) -> ModeCtx<'a> {
    ModeCtx {
        cfg,
        b: enc.builder.clone(),
        vars: enc.vars.clone(),
        session: new_session(cfg, &enc.builder),
        mode: enc.mode_assumptions(mv),
        regs: regs.to_vec(),
        width: enc.width as usize,
    }
}

/// Affine hull of `(outputs, inputs, monomials)` over the runs of one mode
/// vector, with columns in that order. Monomials come from `cfg`.
pub fn affine_relation(block: &Block, cfg: &SynthConfig, mv: &ModeVector) -> Result<AffineSpace, SynthError> {
    let enc = encode_block(block)?;
    let regs = block.tracked();
    let monomials = monomial_indices(&regs, &cfg.monomials)?;
    let mut ctx = mode_ctx(&enc, cfg, &regs, mv);
    let names = updates::monomial_names(&mut ctx, &monomials)?;
    updates::affine_io(&mut ctx, &names)
}

fn synth_pair(
    enc: &BlockEncoding,
    cfg: &SynthConfig,
    regs: &[Reg],
    templates: &TemplateSet,
    guard_patterns: Option<&TemplateSet>,
    monomials: &[Vec<usize>],
    mv: &ModeVector,
) -> Result<(Pair, PairStats), SynthError> {
    let mut ctx = mode_ctx(enc, cfg, regs, mv);
    let mut stats = PairStats { modes: mv.letters(), ..PairStats::default() };

    let before = ctx.session.calls();
    let bounds = synth_guard(&mut ctx, templates)?;
    let mut guard: Vec<_> = match guard_patterns {
        Some(g) => synth_guard(&mut ctx, g)?,
        None => bounds.clone(),
    };
    stats.guard_calls = ctx.session.calls() - before;
    if cfg.drop_redundant {
        guard = drop_redundant(&guard, regs.len());
    }

    let update = updates::synth_updates(&mut ctx, templates, &bounds, monomials, &mut stats)?;
    Ok((Pair { modes: mv.clone(), guard, update }, stats))
}

/// Synthesizes a transfer function for `block`.
pub fn synthesize(block: &Block, cfg: &SynthConfig) -> Result<Synthesis, SynthError> {
    let enc = encode_block(block)?;
    let mut session = new_session(cfg, &enc.builder);
    let mut modes = feasible_modes(&enc, &mut session, cfg.mode_cap)?;
    let mode_calls = session.calls();
    if let Some(only) = &cfg.only_modes {
        if let Some(bad) = only.iter().find(|m| ModeVector::parse(block, m).is_none()) {
            return Err(SynthError::Config(format!("{bad:?} is not a mode vector of this block")));
        }
        modes.retain(|mv| only.contains(&mv.letters()));
    }

    let regs = block.tracked();
    let n = regs.len();
    let templates = update_templates(cfg.domain, n);
    let guard_set = match &cfg.guard_templates {
        Some(ps) => Some(TemplateSet::custom(n, ps.clone())?),
        None => None,
    };
    let monomials = monomial_indices(&regs, &cfg.monomials)?;

    let work = |mv: &ModeVector| synth_pair(&enc, cfg, &regs, &templates, guard_set.as_ref(), &monomials, mv);
    let results: Vec<(Pair, PairStats)> = if cfg.parallel {
        modes.par_iter().map(work).collect::<Result<_, _>>()?
    } else {
        modes.iter().map(work).collect::<Result<_, _>>()?
    };
    let (pairs, pair_stats): (Vec<_>, Vec<_>) = results.into_iter().unzip();

    let tf = TransferFunction {
        block: block.name.clone(),
        source: block.to_string(),
        width: block.width,
        interpretation: block.interp,
        lsl_modes: block.lsl_modes,
        domain: cfg.domain,
        registers: regs,
        templates,
        monomials,
        mode_instructions: enc.instrs.iter().enumerate().filter(|(_, i)| !i.modes.is_empty()).map(|(k, _)| k).collect(),
        pairs,
    };
    Ok(Synthesis { tf, stats: SynthStats { mode_calls, pairs: pair_stats } })
}
