//! Satisfiability: clause containers, solver sessions, DIMACS I/O and an
//! optional bridge to an external solver binary.

pub mod dimacs;
pub mod external;
pub mod solver;

pub use solver::{BudgetExceeded, Lit, Solver, SolverStats};

use std::path::PathBuf;

/// A clause list over variables `0..num_vars`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Cnf {
    pub num_vars: u32,
    pub clauses: Vec<Vec<Lit>>,
}

impl Cnf {
    pub fn new() -> Cnf {
        Cnf::default()
    }

    pub fn new_var(&mut self) -> Lit {
        let v = self.num_vars;
        self.num_vars += 1;
        Lit::pos(v)
    }

    pub fn add_clause(&mut self, lits: &[Lit]) {
        debug_assert!(lits.iter().all(|l| l.var() < self.num_vars));
        self.clauses.push(lits.to_vec());
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SatError {
    #[error(transparent)]
    Budget(#[from] BudgetExceeded),
    #[error("external solver: {0}")]
    External(String),
}

/// Which engine answers the queries of a [`Session`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub enum Backend {
    #[default]
    Internal,
    /// Path to a DIMACS solver printing `s SATISFIABLE` / `v ...` lines.
    External(PathBuf),
}

/// Solver state for a growing formula: clauses only accumulate, assumptions
/// are passed per query.
#[derive(Debug, Clone)]
pub struct Session {
    cnf: Cnf,
    loaded: usize,
    solver: Solver,
    backend: Backend,
    external_model: Vec<bool>,
    calls: u64,
}

impl Session {
    pub fn new(cnf: &Cnf) -> Session {
        Session::with_backend(cnf, Backend::Internal)
    }

    pub fn with_backend(cnf: &Cnf, backend: Backend) -> Session {
        let mut s = Session {
            cnf: Cnf::new(),
            loaded: 0,
            solver: Solver::new(),
            backend,
            external_model: Vec::new(),
            calls: 0,
        };
        s.sync(cnf);
        s
    }

    pub fn set_conflict_budget(&mut self, budget: Option<u64>) {
        self.solver.set_conflict_budget(budget);
    }

    /// Loads the clauses of `cnf` that this session has not seen yet. `cnf`
    /// must extend the formula the session was built from; clauses added
    /// through [`Session::add_clause`] are tracked separately.
    pub fn sync(&mut self, cnf: &Cnf) {
        debug_assert!(cnf.clauses.len() >= self.loaded);
        self.solver.ensure_vars(cnf.num_vars);
        self.cnf.num_vars = cnf.num_vars;
        for c in &cnf.clauses[self.loaded..] {
            self.solver.add_clause(c);
            self.cnf.clauses.push(c.clone());
        }
        self.loaded = cnf.clauses.len();
    }

    /// Adds one clause directly to the session.
    pub fn add_clause(&mut self, lits: &[Lit]) {
        for l in lits {
            self.cnf.num_vars = self.cnf.num_vars.max(l.var() + 1);
        }
        self.solver.add_clause(lits);
        self.cnf.clauses.push(lits.to_vec());
    }

    pub fn solve(&mut self, assumptions: &[Lit]) -> Result<bool, SatError> {
        self.calls += 1;
        match &self.backend {
            Backend::Internal => Ok(self.solver.solve(assumptions)?),
            Backend::External(path) => match external::solve(path, &self.cnf, assumptions)? {
                Some(model) => {
                    self.external_model = model;
                    Ok(true)
                }
                None => Ok(false),
            },
        }
    }

    /// Value of `l` in the model of the last satisfiable query.
    pub fn value(&self, l: Lit) -> bool {
        match self.backend {
            Backend::Internal => self.solver.model_value(l),
            Backend::External(_) => self.external_model[l.var() as usize] != l.is_negative(),
        }
    }

    /// Number of `solve` calls issued on this session.
    pub fn calls(&self) -> u64 {
        self.calls
    }

    pub fn cnf(&self) -> &Cnf {
        &self.cnf
    }

    pub fn solver_stats(&self) -> SolverStats {
        self.solver.stats()
    }
}
