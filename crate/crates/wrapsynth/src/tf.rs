//! Transfer functions: guarded updates per feasible mode vector, with a
//! line-oriented text form and a JSON form.

use crate::ext::{bigint_str, ExtInt};
use crate::isa::{parse_block, Block, Interp, LslModes, ModeVector, Reg};
use crate::template::{Family, Pattern, TemplateSet};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::{self, Write};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Interval,
    #[default]
    Octagon,
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Domain::Interval => "interval",
            Domain::Octagon => "octagon",
        })
    }
}

/// One bound candidate:
/// `⌊(constant + Σ coeff·d_k + Σ coeff·agg(s_m)) / divisor⌋`, where an
/// aggregate is the largest corner product of monomial `m` when its
/// coefficient is positive and the smallest otherwise.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Candidate {
    pub divisor: BigInt,
    pub constant: BigInt,
    /// `(input template index, coefficient)`, sorted by index.
    pub terms: Vec<(usize, BigInt)>,
    /// `(monomial index, coefficient)`, sorted by index.
    pub aggregates: Vec<(usize, BigInt)>,
}

impl Candidate {
    pub fn constant(c: impl Into<BigInt>) -> Candidate {
        Candidate { divisor: BigInt::one(), constant: c.into(), terms: Vec::new(), aggregates: Vec::new() }
    }

    /// `d_k + c`
    pub fn shifted(k: usize, c: impl Into<BigInt>) -> Candidate {
        Candidate { divisor: BigInt::one(), constant: c.into(), terms: vec![(k, BigInt::one())], aggregates: Vec::new() }
    }

    /// Merges duplicate indices, drops zeros and sorts.
    pub fn normalized(mut self) -> Candidate {
        fn merge(v: &mut Vec<(usize, BigInt)>) {
            let mut m: BTreeMap<usize, BigInt> = BTreeMap::new();
            for (k, c) in v.drain(..) {
                *m.entry(k).or_insert_with(BigInt::zero) += c;
            }
            v.extend(m.into_iter().filter(|(_, c)| !c.is_zero()));
        }
        merge(&mut self.terms);
        merge(&mut self.aggregates);
        self
    }

    /// Sum of two candidates over a common divisor.
    pub fn add(&self, other: &Candidate) -> Candidate {
        let (a, b) = (&self.divisor, &other.divisor);
        let scale = |c: &Candidate, k: &BigInt| Candidate {
            divisor: BigInt::one(),
            constant: &c.constant * k,
            terms: c.terms.iter().map(|(i, x)| (*i, x * k)).collect(),
            aggregates: c.aggregates.iter().map(|(i, x)| (*i, x * k)).collect(),
        };
        let (x, y) = (scale(self, b), scale(other, a));
        Candidate {
            divisor: a * b,
            constant: x.constant + y.constant,
            terms: x.terms.into_iter().chain(y.terms).collect(),
            aggregates: x.aggregates.into_iter().chain(y.aggregates).collect(),
        }
        .normalized()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowKind {
    Affine,
    Const,
    MinExpr,
    Nonlinear,
}

/// `d'_target ≤ min(candidates)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UpdateRow {
    pub target: usize,
    pub candidates: Vec<Candidate>,
}

impl UpdateRow {
    pub fn kind(&self) -> RowKind {
        if self.candidates.iter().any(|c| !c.aggregates.is_empty()) {
            RowKind::Nonlinear
        } else if self.candidates.len() > 1 {
            RowKind::MinExpr
        } else if self.candidates.first().is_some_and(|c| c.terms.is_empty()) {
            RowKind::Const
        } else {
            RowKind::Affine
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GuardRow {
    pub pattern: Pattern,
    pub bound: ExtInt,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pair {
    pub modes: ModeVector,
    pub guard: Vec<GuardRow>,
    pub update: Vec<UpdateRow>,
}

impl Pair {
    pub fn row(&self, target: usize) -> Option<&UpdateRow> {
        self.update.iter().find(|r| r.target == target)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TransferFunction {
    pub block: String,
    /// Instructions, `;`-separated.
    pub source: String,
    pub width: u32,
    pub interpretation: Interp,
    pub lsl_modes: LslModes,
    pub domain: Domain,
    pub registers: Vec<Reg>,
    /// Patterns of the input constants `d_k` and output constants `d'_j`.
    pub templates: TemplateSet,
    /// Monomials as lists of indices into `registers`.
    pub monomials: Vec<Vec<usize>>,
    /// Indices of the multi-modal instructions, the keys of each pair.
    pub mode_instructions: Vec<usize>,
    pub pairs: Vec<Pair>,
}

impl TransferFunction {
    pub fn reg_names(&self) -> Vec<String> {
        self.registers.iter().map(|r| format!("r{r}")).collect()
    }

    pub fn output_names(&self) -> Vec<String> {
        self.registers.iter().map(|r| format!("r{r}'")).collect()
    }

    /// The block this function was synthesized for, rebuilt from its source.
    pub fn block(&self) -> Result<Block, TfParseError> {
        let b = parse_block(&self.source).map_err(|e| TfParseError { line: 0, msg: format!("source: {e}") })?;
        let mut b = b.with_name(&self.block).with_width(self.width).with_interp(self.interpretation).with_lsl_modes(self.lsl_modes);
        b.extra_regs = self.registers.clone();
        Ok(b)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&JsonTf::from(self)).expect("serializable") + "\n"
    }

    pub fn from_json(s: &str) -> Result<TransferFunction, TfParseError> {
        let j: JsonTf = serde_json::from_str(s).map_err(|e| TfParseError { line: e.line(), msg: e.to_string() })?;
        j.into_tf()
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn from_text(s: &str) -> Result<TransferFunction, TfParseError> {
        s.parse()
    }

    fn monomial_name(&self, m: usize) -> String {
        format!("s{}", m + 1)
    }

    pub fn candidate_text(&self, c: &Candidate) -> String {
        let mut s = String::new();
        let push = |coef: &BigInt, sym: &str, s: &mut String| {
            let sign = if coef.is_negative() { "-" } else if s.is_empty() { "" } else { "+" };
            let mag = coef.abs();
            if mag.is_one() {
                let _ = write!(s, "{sign}{sym}");
            } else {
                let _ = write!(s, "{sign}{mag}*{sym}");
            }
        };
        for (k, coef) in &c.terms {
            push(coef, &format!("d{}", k + 1), &mut s);
        }
        for (m, coef) in &c.aggregates {
            let agg = if coef.is_positive() { "max" } else { "min" };
            push(coef, &format!("{agg}({})", self.monomial_name(*m)), &mut s);
        }
        if !c.constant.is_zero() || s.is_empty() {
            if s.is_empty() {
                let _ = write!(s, "{}", c.constant);
            } else if c.constant.is_negative() {
                let _ = write!(s, "-{}", -&c.constant);
            } else {
                let _ = write!(s, "+{}", c.constant);
            }
        }
        if c.divisor.is_one() {
            s
        } else {
            format!("floor(({s})/{})", c.divisor)
        }
    }

    pub fn row_text(&self, r: &UpdateRow) -> String {
        let parts: Vec<String> = r.candidates.iter().map(|c| self.candidate_text(c)).collect();
        let body = if parts.len() == 1 { parts[0].clone() } else { format!("min({})", parts.join(", ")) };
        format!("d'{} <= {}", r.target + 1, body)
    }
}

/// The standard family the patterns spell out. With one register both
/// families coincide, so the declared domain decides.
fn family_of(domain: Domain, n: usize, patterns: &[Pattern]) -> Family {
    let octagon = patterns == TemplateSet::octagon(n).patterns.as_slice();
    let interval = patterns == TemplateSet::interval(n).patterns.as_slice();
    match domain {
        Domain::Octagon if octagon => Family::Octagon,
        _ if interval => Family::Interval,
        _ if octagon => Family::Octagon,
        _ => Family::Custom,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("transfer function, line {line}: {msg}")]
pub struct TfParseError {
    pub line: usize,
    pub msg: String,
}

fn reg_list(regs: &[Reg]) -> String {
    regs.iter().map(|r| format!("R{r}")).collect::<Vec<_>>().join(" ")
}

impl fmt::Display for TransferFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = self.reg_names();
        writeln!(f, "transfer-function")?;
        writeln!(f, "block: {}", self.block)?;
        writeln!(f, "source: {}", self.source)?;
        writeln!(f, "width: {}", self.width)?;
        writeln!(f, "interpretation: {}", self.interpretation)?;
        writeln!(f, "lsl-modes: {}", if self.lsl_modes == LslModes::Carry { "carry" } else { "signed" })?;
        writeln!(f, "domain: {}", self.domain)?;
        writeln!(f, "registers: {}", reg_list(&self.registers))?;
        let t: Vec<String> = self
            .templates
            .patterns
            .iter()
            .enumerate()
            .map(|(k, p)| format!("d{} = {}", k + 1, p.display_with(&names)))
            .collect();
        writeln!(f, "templates: {}", t.join("; "))?;
        if !self.monomials.is_empty() {
            let m: Vec<String> = self
                .monomials
                .iter()
                .enumerate()
                .map(|(i, fs)| {
                    let fs: Vec<&str> = fs.iter().map(|&k| names[k].as_str()).collect();
                    format!("s{} = {}", i + 1, fs.join("*"))
                })
                .collect();
            writeln!(f, "monomials: {}", m.join("; "))?;
        }
        let idx: Vec<String> = self.mode_instructions.iter().map(|i| i.to_string()).collect();
        writeln!(f, "mode-instructions: {}", idx.join(" "))?;
        for p in &self.pairs {
            writeln!(f, "pair {}", p.modes)?;
            for g in &p.guard {
                writeln!(f, "  guard {} <= {}", g.pattern.display_with(&names), g.bound)?;
            }
            for r in &p.update {
                writeln!(f, "  update {}", self.row_text(r))?;
            }
            writeln!(f, "end")?;
        }
        Ok(())
    }
}

fn parse_reg_name(s: &str) -> Option<Reg> {
    let n: Reg = s.trim().strip_prefix(['R', 'r'])?.parse().ok()?;
    (n < 8).then_some(n)
}

/// Parses `±a±2b…` over `names` into dense coefficients.
pub(crate) fn parse_pattern(s: &str, names: &[String]) -> Option<Pattern> {
    let mut coeffs = vec![0i64; names.len()];
    for (sign, tok) in split_signed(s)? {
        let (mag, name) = match tok.find(|c: char| !c.is_ascii_digit()) {
            Some(0) => (1, tok),
            Some(i) => (tok[..i].parse().ok()?, &tok[i..]),
            None => return None,
        };
        let k = names.iter().position(|n| n == name)?;
        coeffs[k] += sign * mag;
    }
    Some(Pattern(coeffs))
}

/// Splits `a+b-c` into signed terms, respecting parentheses.
fn split_signed(s: &str) -> Option<Vec<(i64, &str)>> {
    let s = s.trim();
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    let mut sign = 1;
    let bytes = s.as_bytes();
    for i in 0..=bytes.len() {
        let at_end = i == bytes.len();
        let c = if at_end { b'+' } else { bytes[i] };
        match c {
            b'(' => depth += 1,
            b')' => depth -= 1,
            b'+' | b'-' if depth == 0 => {
                let tok = s[start..i].trim();
                if !tok.is_empty() {
                    out.push((sign, tok));
                } else if i != 0 && !at_end {
                    return None;
                }
                sign = if c == b'-' { -1 } else { 1 };
                start = i + 1;
            }
            _ => {}
        }
    }
    Some(out)
}

fn parse_candidate(s: &str, n_templates: usize, n_mono: usize) -> Option<Candidate> {
    let s = s.trim();
    let (body, divisor) = match s.strip_prefix("floor((") {
        Some(rest) => {
            let close = rest.rfind(")/")?;
            let div = rest[close + 2..].strip_suffix(')')?;
            (&rest[..close], BigInt::from_str(div).ok()?)
        }
        None => (s, BigInt::one()),
    };
    let mut c = Candidate { divisor, constant: BigInt::zero(), terms: Vec::new(), aggregates: Vec::new() };
    for (sign, tok) in split_signed(body)? {
        let (coef, sym) = match tok.split_once('*') {
            Some((m, rest)) => (BigInt::from_str(m).ok()?, rest),
            None if tok.starts_with(|ch: char| ch.is_ascii_digit()) => {
                c.constant += BigInt::from(sign) * BigInt::from_str(tok).ok()?;
                continue;
            }
            None => (BigInt::one(), tok),
        };
        let coef = coef * sign;
        if let Some(k) = sym.strip_prefix('d') {
            let k: usize = k.parse().ok()?;
            if k == 0 || k > n_templates {
                return None;
            }
            c.terms.push((k - 1, coef));
        } else {
            let inner = sym.strip_prefix("max(s").or_else(|| sym.strip_prefix("min(s"))?.strip_suffix(')')?;
            let m: usize = inner.parse().ok()?;
            if m == 0 || m > n_mono {
                return None;
            }
            let want_max = sym.starts_with("max");
            if want_max != coef.is_positive() {
                return None;
            }
            c.aggregates.push((m - 1, coef));
        }
    }
    Some(c.normalized())
}

/// Splits `a, b, c` at top-level commas.
fn split_commas(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(s[start..].trim());
    out
}

impl FromStr for TransferFunction {
    type Err = TfParseError;

    fn from_str(text: &str) -> Result<TransferFunction, TfParseError> {
        let mut header: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
        let mut lines = text.lines().enumerate().peekable();
        let err = |line: usize, msg: &str| TfParseError { line: line + 1, msg: msg.to_string() };
        match lines.next() {
            Some((_, l)) if l.trim() == "transfer-function" => {}
            _ => return Err(err(0, "missing transfer-function header")),
        }
        while let Some(&(ln, l)) = lines.peek() {
            if l.starts_with('#') {
                lines.next();
                continue;
            }
            if l.starts_with("pair ") || l.trim().is_empty() {
                break;
            }
            let (k, v) = l.split_once(':').ok_or_else(|| err(ln, "expected key: value"))?;
            header.insert(k.trim(), (ln, v.trim()));
            lines.next();
        }
        let get = |k: &str| header.get(k).copied().ok_or_else(|| err(0, &format!("missing {k}")));
        let (_, block) = get("block")?;
        let (sl, source) = get("source")?;
        let parsed = parse_block(source).map_err(|e| err(sl, &e.to_string()))?;
        let (wl, width) = get("width")?;
        let width: u32 = width.parse().map_err(|_| err(wl, "bad width"))?;
        let (il, interp) = get("interpretation")?;
        let interpretation = match interp {
            "signed" => Interp::Signed,
            "unsigned" => Interp::Unsigned,
            _ => return Err(err(il, "bad interpretation")),
        };
        let (ll, lsl) = get("lsl-modes")?;
        let lsl_modes = match lsl {
            "carry" => LslModes::Carry,
            "signed" => LslModes::Signed,
            _ => return Err(err(ll, "bad lsl-modes")),
        };
        let (dl, domain) = get("domain")?;
        let domain = match domain {
            "interval" => Domain::Interval,
            "octagon" => Domain::Octagon,
            _ => return Err(err(dl, "bad domain")),
        };
        let (rl, regs) = get("registers")?;
        let registers: Vec<Reg> = regs
            .split_whitespace()
            .map(|t| parse_reg_name(t).ok_or_else(|| err(rl, "bad register")))
            .collect::<Result<_, _>>()?;
        let names: Vec<String> = registers.iter().map(|r| format!("r{r}")).collect();
        let (tl, tpl) = get("templates")?;
        let mut patterns = Vec::new();
        for (k, part) in tpl.split(';').filter(|p| !p.trim().is_empty()).enumerate() {
            let (lhs, rhs) = part.split_once('=').ok_or_else(|| err(tl, "bad template"))?;
            if lhs.trim() != format!("d{}", k + 1) {
                return Err(err(tl, "templates out of order"));
            }
            patterns.push(parse_pattern(rhs, &names).ok_or_else(|| err(tl, "bad template pattern"))?);
        }
        let n = registers.len();
        let templates = TemplateSet { family: family_of(domain, n, &patterns), patterns };
        let mut monomials = Vec::new();
        if let Some(&(ml, mono)) = header.get("monomials") {
            for (i, part) in mono.split(';').enumerate() {
                let (lhs, rhs) = part.split_once('=').ok_or_else(|| err(ml, "bad monomial"))?;
                if lhs.trim() != format!("s{}", i + 1) {
                    return Err(err(ml, "monomials out of order"));
                }
                let fs: Vec<usize> = rhs
                    .split('*')
                    .map(|t| names.iter().position(|n| n == t.trim()).ok_or_else(|| err(ml, "bad monomial factor")))
                    .collect::<Result<_, _>>()?;
                monomials.push(fs);
            }
        }
        let (mil, mi) = get("mode-instructions")?;
        let mode_instructions: Vec<usize> =
            mi.split_whitespace().map(|t| t.parse().map_err(|_| err(mil, "bad index"))).collect::<Result<_, _>>()?;

        let mut pairs = Vec::new();
        let mut current: Option<Pair> = None;
        for (ln, raw) in lines {
            let l = raw.trim();
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            if let Some(letters) = l.strip_prefix("pair ") {
                let letters = if letters.trim() == "(empty)" { "" } else { letters.trim() };
                if letters.len() != mode_instructions.len() {
                    return Err(err(ln, "mode vector length"));
                }
                let modes = letters
                    .chars()
                    .zip(&mode_instructions)
                    .map(|(c, &i)| crate::isa::Mode::from_letter(c).map(|m| (i, m)))
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| err(ln, "bad mode letter"))?;
                current = Some(Pair { modes: ModeVector(modes), guard: Vec::new(), update: Vec::new() });
            } else if l == "end" {
                pairs.push(current.take().ok_or_else(|| err(ln, "end outside pair"))?);
            } else if let Some(g) = l.strip_prefix("guard ") {
                let p = current.as_mut().ok_or_else(|| err(ln, "guard outside pair"))?;
                let (lhs, rhs) = g.split_once("<=").ok_or_else(|| err(ln, "bad guard"))?;
                let pattern = parse_pattern(lhs, &names).ok_or_else(|| err(ln, "bad guard pattern"))?;
                let bound: ExtInt = rhs.trim().parse().map_err(|e: String| err(ln, &e))?;
                p.guard.push(GuardRow { pattern, bound });
            } else if let Some(u) = l.strip_prefix("update ") {
                let p = current.as_mut().ok_or_else(|| err(ln, "update outside pair"))?;
                let (lhs, rhs) = u.split_once("<=").ok_or_else(|| err(ln, "bad update"))?;
                let target: usize = lhs
                    .trim()
                    .strip_prefix("d'")
                    .and_then(|t| t.parse().ok())
                    .filter(|&t: &usize| t >= 1 && t <= templates.len())
                    .ok_or_else(|| err(ln, "bad update target"))?;
                let rhs = rhs.trim();
                let parts = match rhs.strip_prefix("min(").and_then(|r| r.strip_suffix(')')) {
                    Some(inner) if split_commas(inner).len() > 1 => split_commas(inner),
                    _ => vec![rhs],
                };
                let candidates = parts
                    .iter()
                    .map(|c| parse_candidate(c, templates.len(), monomials.len()))
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| err(ln, "bad update body"))?;
                p.update.push(UpdateRow { target: target - 1, candidates });
            } else {
                return Err(err(ln, "unexpected line"));
            }
        }
        if current.is_some() {
            return Err(err(text.lines().count(), "unterminated pair"));
        }
        let _ = parsed;
        Ok(TransferFunction {
            block: block.to_string(),
            source: source.to_string(),
            width,
            interpretation,
            lsl_modes,
            domain,
            registers,
            templates,
            monomials,
            mode_instructions,
            pairs,
        })
    }
}

// JSON layer.

#[derive(Serialize, Deserialize)]
struct JsonTemplate {
    name: String,
    coeffs: BTreeMap<String, i64>,
}

#[derive(Serialize, Deserialize)]
struct JsonMonomial {
    name: String,
    factors: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct JsonGuard {
    coeffs: BTreeMap<String, i64>,
    bound: ExtInt,
}

#[derive(Serialize, Deserialize)]
struct JsonTerm(String, #[serde(with = "bigint_str")] BigInt);

#[derive(Serialize, Deserialize)]
struct JsonCandidate {
    #[serde(with = "bigint_str")]
    divisor: BigInt,
    #[serde(with = "bigint_str")]
    constant: BigInt,
    terms: Vec<JsonTerm>,
    aggregates: Vec<JsonTerm>,
}

#[derive(Serialize, Deserialize)]
struct JsonUpdate {
    target: String,
    kind: RowKind,
    body: Vec<JsonCandidate>,
}

#[derive(Serialize, Deserialize)]
struct JsonPair {
    modes: String,
    guard: Vec<JsonGuard>,
    update: Vec<JsonUpdate>,
}

#[derive(Serialize, Deserialize)]
struct JsonTf {
    block: String,
    source: String,
    width: u32,
    interpretation: Interp,
    lsl_modes: LslModes,
    domain: Domain,
    registers: Vec<String>,
    templates: Vec<JsonTemplate>,
    monomials: Vec<JsonMonomial>,
    mode_instructions: Vec<usize>,
    pairs: Vec<JsonPair>,
}

fn coeff_map(p: &Pattern, regs: &[Reg]) -> BTreeMap<String, i64> {
    p.support().into_iter().map(|(i, c)| (format!("R{}", regs[i]), c)).collect()
}

impl From<&TransferFunction> for JsonTf {
    fn from(tf: &TransferFunction) -> JsonTf {
        let regs = &tf.registers;
        JsonTf {
            block: tf.block.clone(),
            source: tf.source.clone(),
            width: tf.width,
            interpretation: tf.interpretation,
            lsl_modes: tf.lsl_modes,
            domain: tf.domain,
            registers: regs.iter().map(|r| format!("R{r}")).collect(),
            templates: tf
                .templates
                .patterns
                .iter()
                .enumerate()
                .map(|(k, p)| JsonTemplate { name: format!("d{}", k + 1), coeffs: coeff_map(p, regs) })
                .collect(),
            monomials: tf
                .monomials
                .iter()
                .enumerate()
                .map(|(i, fs)| JsonMonomial {
                    name: format!("s{}", i + 1),
                    factors: fs.iter().map(|&k| format!("R{}", regs[k])).collect(),
                })
                .collect(),
            mode_instructions: tf.mode_instructions.clone(),
            pairs: tf
                .pairs
                .iter()
                .map(|p| JsonPair {
                    modes: p.modes.letters(),
                    guard: p
                        .guard
                        .iter()
                        .map(|g| JsonGuard { coeffs: coeff_map(&g.pattern, regs), bound: g.bound.clone() })
                        .collect(),
                    update: p
                        .update
                        .iter()
                        .map(|r| JsonUpdate {
                            target: format!("d'{}", r.target + 1),
                            kind: r.kind(),
                            body: r
                                .candidates
                                .iter()
                                .map(|c| JsonCandidate {
                                    divisor: c.divisor.clone(),
                                    constant: c.constant.clone(),
                                    terms: c.terms.iter().map(|(k, x)| JsonTerm(format!("d{}", k + 1), x.clone())).collect(),
                                    aggregates: c
                                        .aggregates
                                        .iter()
                                        .map(|(m, x)| JsonTerm(format!("s{}", m + 1), x.clone()))
                                        .collect(),
                                })
                                .collect(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

impl JsonTf {
    fn into_tf(self) -> Result<TransferFunction, TfParseError> {
        let err = |msg: &str| TfParseError { line: 0, msg: msg.to_string() };
        let registers: Vec<Reg> =
            self.registers.iter().map(|r| parse_reg_name(r).ok_or_else(|| err("bad register"))).collect::<Result<_, _>>()?;
        let n = registers.len();
        let pattern = |m: &BTreeMap<String, i64>| -> Result<Pattern, TfParseError> {
            let mut c = vec![0; n];
            for (r, &v) in m {
                let reg = parse_reg_name(r).ok_or_else(|| err("bad register"))?;
                let k = registers.iter().position(|&x| x == reg).ok_or_else(|| err("untracked register"))?;
                c[k] = v;
            }
            Ok(Pattern(c))
        };
        let patterns: Vec<Pattern> = self.templates.iter().map(|t| pattern(&t.coeffs)).collect::<Result<_, _>>()?;
        let family = family_of(self.domain, n, &patterns);
        let monomials = self
            .monomials
            .iter()
            .map(|m| {
                m.factors
                    .iter()
                    .map(|f| {
                        let reg = parse_reg_name(f).ok_or_else(|| err("bad factor"))?;
                        registers.iter().position(|&x| x == reg).ok_or_else(|| err("untracked factor"))
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        let index = |prefix: &str, s: &str, limit: usize| -> Result<usize, TfParseError> {
            let k: usize = s.strip_prefix(prefix).and_then(|t| t.parse().ok()).ok_or_else(|| err("bad symbol"))?;
            if k == 0 || k > limit {
                return Err(err("symbol out of range"));
            }
            Ok(k - 1)
        };
        let mut pairs = Vec::new();
        for p in &self.pairs {
            if p.modes.len() != self.mode_instructions.len() {
                return Err(err("mode vector length"));
            }
            let modes = p
                .modes
                .chars()
                .zip(&self.mode_instructions)
                .map(|(c, &i)| crate::isa::Mode::from_letter(c).map(|m| (i, m)))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| err("bad mode letter"))?;
            let guard = p
                .guard
                .iter()
                .map(|g| Ok(GuardRow { pattern: pattern(&g.coeffs)?, bound: g.bound.clone() }))
                .collect::<Result<Vec<_>, TfParseError>>()?;
            let mut update = Vec::new();
            for u in &p.update {
                let target = index("d'", &u.target, patterns.len())?;
                let mut candidates = Vec::new();
                for c in &u.body {
                    let terms = c
                        .terms
                        .iter()
                        .map(|JsonTerm(s, x)| Ok((index("d", s, patterns.len())?, x.clone())))
                        .collect::<Result<Vec<_>, TfParseError>>()?;
                    let aggregates = c
                        .aggregates
                        .iter()
                        .map(|JsonTerm(s, x)| Ok((index("s", s, monomials.len())?, x.clone())))
                        .collect::<Result<Vec<_>, TfParseError>>()?;
                    if !c.divisor.is_positive() {
                        return Err(err("divisor must be positive"));
                    }
                    candidates.push(Candidate { divisor: c.divisor.clone(), constant: c.constant.clone(), terms, aggregates });
                }
                let row = UpdateRow { target, candidates };
                if row.kind() != u.kind {
                    return Err(err("row kind does not match its body"));
                }
                update.push(row);
            }
            pairs.push(Pair { modes: ModeVector(modes), guard, update });
        }
        Ok(TransferFunction {
            block: self.block,
            source: self.source,
            width: self.width,
            interpretation: self.interpretation,
            lsl_modes: self.lsl_modes,
            domain: self.domain,
            registers,
            templates: TemplateSet { family, patterns },
            monomials,
            mode_instructions: self.mode_instructions,
            pairs,
        })
    }
}
