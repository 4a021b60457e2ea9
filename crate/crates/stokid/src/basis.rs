//! Basis function dictionaries.
//!
//! A dictionary is an ordered list of candidate functions used to expand
//! drift, diffusion, or free-energy fields as linear combinations. Every
//! entry supplies an analytic value and first derivative, so regression
//! designs never rely on numerical differentiation.
//!
//! Dictionaries are written in a small text format, one entry per line or
//! separated by `;` (`#` starts a comment):
//!
//! ```text
//! const            # 1
//! poly 3           # x^3
//! sin 7            # sin(7x)
//! cos 11           # cos(11x)
//! tanh 10          # tanh(10x - b), b optional, default 0
//! sech2 10 0       # a - a*tanh^2(ax - b)
//! gauss 50 3       # exp(-a (x - c)^2)
//! tanh2shift 4     # tanh^2(x - c) + 1
//! ```
//!
//! The builtin reference dictionaries used by the benchmark systems are
//! available through [`Dictionary::builtin`].

use std::fmt;

use nalgebra::DMatrix;
use thiserror::Error;

/// One scalar factor of a basis function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalarBasis {
    /// f(x) = 1
    Const,
    /// f(x) = x^k, k >= 1
    Poly { k: u32 },
    /// f(x) = sin(a x)
    Sin { a: f64 },
    /// f(x) = cos(a x)
    Cos { a: f64 },
    /// f(x) = tanh(a x - b)
    Tanh { a: f64, b: f64 },
    /// f(x) = a - a tanh^2(a x - b), the sech^2-shaped bump
    Sech2 { a: f64, b: f64 },
    /// f(x) = exp(-a (x - c)^2)
    Gauss { a: f64, c: f64 },
    /// f(x) = tanh^2(x - c) + 1
    Tanh2Shift { c: f64 },
}

impl ScalarBasis {
    /// Value at x.
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            ScalarBasis::Const => 1.0,
            ScalarBasis::Poly { k } => x.powi(k as i32),
            ScalarBasis::Sin { a } => (a * x).sin(),
            ScalarBasis::Cos { a } => (a * x).cos(),
            ScalarBasis::Tanh { a, b } => (a * x - b).tanh(),
            ScalarBasis::Sech2 { a, b } => {
                let t = (a * x - b).tanh();
                a - a * t * t
            }
            ScalarBasis::Gauss { a, c } => (-a * (x - c) * (x - c)).exp(),
            ScalarBasis::Tanh2Shift { c } => {
                let t = (x - c).tanh();
                t * t + 1.0
            }
        }
    }

    /// First derivative at x.
    pub fn deriv(&self, x: f64) -> f64 {
        match *self {
            ScalarBasis::Const => 0.0,
            ScalarBasis::Poly { k } => f64::from(k) * x.powi(k as i32 - 1),
            ScalarBasis::Sin { a } => a * (a * x).cos(),
            ScalarBasis::Cos { a } => -a * (a * x).sin(),
            ScalarBasis::Tanh { a, b } => {
                let t = (a * x - b).tanh();
                a * (1.0 - t * t)
            }
            ScalarBasis::Sech2 { a, b } => {
                // d/dx [a - a tanh^2(u)] with u = ax - b
                let t = (a * x - b).tanh();
                -2.0 * a * a * t * (1.0 - t * t)
            }
            ScalarBasis::Gauss { a, c } => {
                -2.0 * a * (x - c) * (-a * (x - c) * (x - c)).exp()
            }
            ScalarBasis::Tanh2Shift { c } => {
                let t = (x - c).tanh();
                2.0 * t * (1.0 - t * t)
            }
        }
    }

    /// Canonical key; parameters rounded to 12 significant digits so that
    /// duplicate detection is insensitive to formatting noise.
    fn canonical_key(&self) -> String {
        fn p(v: f64) -> String {
            format!("{:.11e}", v)
        }
        match *self {
            ScalarBasis::Const => "const".into(),
            ScalarBasis::Poly { k } => format!("poly {k}"),
            ScalarBasis::Sin { a } => format!("sin {}", p(a)),
            ScalarBasis::Cos { a } => format!("cos {}", p(a)),
            ScalarBasis::Tanh { a, b } => format!("tanh {} {}", p(a), p(b)),
            ScalarBasis::Sech2 { a, b } => format!("sech2 {} {}", p(a), p(b)),
            ScalarBasis::Gauss { a, c } => format!("gauss {} {}", p(a), p(c)),
            ScalarBasis::Tanh2Shift { c } => format!("tanh2shift {}", p(c)),
        }
    }
}

impl fmt::Display for ScalarBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ScalarBasis::Const => write!(f, "const"),
            ScalarBasis::Poly { k } => write!(f, "poly {k}"),
            ScalarBasis::Sin { a } => write!(f, "sin {a}"),
            ScalarBasis::Cos { a } => write!(f, "cos {a}"),
            ScalarBasis::Tanh { a, b } => {
                if b == 0.0 {
                    write!(f, "tanh {a}")
                } else {
                    write!(f, "tanh {a} {b}")
                }
            }
            ScalarBasis::Sech2 { a, b } => {
                if b == 0.0 {
                    write!(f, "sech2 {a}")
                } else {
                    write!(f, "sech2 {a} {b}")
                }
            }
            ScalarBasis::Gauss { a, c } => write!(f, "gauss {a} {c}"),
            ScalarBasis::Tanh2Shift { c } => write!(f, "tanh2shift {c}"),
        }
    }
}

/// A dictionary entry: a product of per-coordinate scalar factors.
///
/// Factor `j` applies to coordinate `j`; coordinates beyond the factor list
/// are implicitly constant. The text format covers the single-factor case,
/// which is all the one-dimensional benchmarks need; products are built
/// programmatically for higher-dimensional fits.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisFunction {
    factors: Vec<ScalarBasis>,
}

impl BasisFunction {
    /// Single scalar factor acting on coordinate 0.
    pub fn scalar(factor: ScalarBasis) -> Self {
        BasisFunction { factors: vec![factor] }
    }

    /// Product of per-coordinate factors (factor j acts on coordinate j).
    pub fn product(factors: Vec<ScalarBasis>) -> Self {
        assert!(!factors.is_empty(), "basis function needs at least one factor");
        BasisFunction { factors }
    }

    pub fn factors(&self) -> &[ScalarBasis] {
        &self.factors
    }

    /// Value at an m-dimensional point.
    pub fn eval(&self, point: &[f64]) -> f64 {
        self.factors
            .iter()
            .zip(point)
            .map(|(f, &x)| f.eval(x))
            .product()
    }

    /// Partial derivative with respect to coordinate `i`.
    pub fn partial(&self, point: &[f64], i: usize) -> f64 {
        if i >= self.factors.len() {
            return 0.0;
        }
        let mut out = 1.0;
        for (j, (f, &x)) in self.factors.iter().zip(point).enumerate() {
            out *= if j == i { f.deriv(x) } else { f.eval(x) };
        }
        out
    }

    fn min_dim(&self) -> usize {
        self.factors.len()
    }

    fn canonical_key(&self) -> String {
        self.factors
            .iter()
            .map(ScalarBasis::canonical_key)
            .collect::<Vec<_>>()
            .join(" * ")
    }

    /// Human-readable name, also used as the coefficient label in reports.
    pub fn name(&self) -> String {
        self.factors
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(" * ")
    }
}

/// Errors from dictionary parsing and evaluation.
#[derive(Debug, Error)]
pub enum BasisError {
    #[error("line {line}, column {col}: unknown basis kind `{word}`")]
    UnknownKind { line: usize, col: usize, word: String },
    #[error("line {line}, column {col}: `{kind}` is missing parameter `{param}`")]
    MissingParam { line: usize, col: usize, kind: String, param: String },
    #[error("line {line}, column {col}: cannot parse `{token}` as a number")]
    BadNumber { line: usize, col: usize, token: String },
    #[error("line {line}, column {col}: unexpected trailing token `{token}`")]
    TrailingToken { line: usize, col: usize, token: String },
    #[error("line {line}, column {col}: non-finite parameter in `{entry}`")]
    NonFiniteParam { line: usize, col: usize, entry: String },
    #[error("duplicate dictionary entry `{name}` (entries {first} and {second})")]
    Duplicate { name: String, first: usize, second: usize },
    #[error("dictionary is empty")]
    Empty,
    #[error("unknown builtin dictionary `{0}`")]
    UnknownBuiltin(String),
    #[error("non-finite input point at row {row}")]
    NonFinitePoint { row: usize },
    #[error("point dimension {got} is below the dictionary's requirement {need}")]
    DimensionMismatch { got: usize, need: usize },
    #[error("multivariate product entries have no text form")]
    UnserializableProduct,
}

/// An ordered, duplicate-free list of basis functions.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    name: String,
    functions: Vec<BasisFunction>,
}

impl Dictionary {
    /// Build a dictionary, rejecting duplicates after canonical parameter
    /// normalization.
    pub fn new(name: impl Into<String>, functions: Vec<BasisFunction>) -> Result<Self, BasisError> {
        if functions.is_empty() {
            return Err(BasisError::Empty);
        }
        let mut seen: std::collections::HashMap<String, usize> = std::collections::HashMap::new();
        for (i, f) in functions.iter().enumerate() {
            if let Some(&first) = seen.get(&f.canonical_key()) {
                return Err(BasisError::Duplicate { name: f.name(), first, second: i });
            }
            seen.insert(f.canonical_key(), i);
        }
        Ok(Dictionary { name: name.into(), functions })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Number of basis functions K.
    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn functions(&self) -> &[BasisFunction] {
        &self.functions
    }

    /// New dictionary from a subset of entries, preserving order.
    pub fn subset(&self, name: impl Into<String>, indices: &[usize]) -> Result<Self, BasisError> {
        let functions = indices.iter().map(|&i| self.functions[i].clone()).collect();
        Dictionary::new(name, functions)
    }

    /// First `n` entries.
    pub fn prefix(&self, name: impl Into<String>, n: usize) -> Result<Self, BasisError> {
        Dictionary::new(name, self.functions[..n].to_vec())
    }

    /// Index of an entry equal (after canonical normalization) to `f`, if present.
    pub fn position_of(&self, f: &BasisFunction) -> Option<usize> {
        let key = f.canonical_key();
        self.functions.iter().position(|g| g.canonical_key() == key)
    }

    fn check_points(&self, points: &[f64], dim: usize) -> Result<usize, BasisError> {
        assert!(dim > 0 && points.len() % dim == 0, "flat point buffer must be a multiple of dim");
        let need = self.functions.iter().map(BasisFunction::min_dim).max().unwrap_or(1);
        if dim < need {
            return Err(BasisError::DimensionMismatch { got: dim, need });
        }
        let n = points.len() / dim;
        for (row, chunk) in points.chunks_exact(dim).enumerate() {
            if chunk.iter().any(|v| !v.is_finite()) {
                return Err(BasisError::NonFinitePoint { row });
            }
        }
        Ok(n)
    }

    /// Evaluation matrix: entry (l, k) = f_k at point l. `points` is a flat
    /// row-major buffer of `dim`-dimensional coordinates.
    pub fn evaluate(&self, points: &[f64], dim: usize) -> Result<DMatrix<f64>, BasisError> {
        let n = self.check_points(points, dim)?;
        let k = self.len();
        let mut m = DMatrix::zeros(n, k);
        for (l, chunk) in points.chunks_exact(dim).enumerate() {
            for (j, f) in self.functions.iter().enumerate() {
                m[(l, j)] = f.eval(chunk);
            }
        }
        Ok(m)
    }

    /// 1D convenience wrapper over [`Dictionary::evaluate`].
    pub fn evaluate_1d(&self, xs: &[f64]) -> Result<DMatrix<f64>, BasisError> {
        self.evaluate(xs, 1)
    }

    /// Gradient tensor as one N x K matrix per coordinate: entry
    /// `out[i][(l, k)]` = ∂f_k/∂x_i at point l.
    pub fn evaluate_gradient(
        &self,
        points: &[f64],
        dim: usize,
    ) -> Result<Vec<DMatrix<f64>>, BasisError> {
        let n = self.check_points(points, dim)?;
        let k = self.len();
        let mut out = vec![DMatrix::zeros(n, k); dim];
        for (l, chunk) in points.chunks_exact(dim).enumerate() {
            for (j, f) in self.functions.iter().enumerate() {
                for (i, g) in out.iter_mut().enumerate() {
                    g[(l, j)] = f.partial(chunk, i);
                }
            }
        }
        Ok(out)
    }

    /// 1D gradient convenience: entry (l, k) = f_k'(x_l).
    pub fn evaluate_gradient_1d(&self, xs: &[f64]) -> Result<DMatrix<f64>, BasisError> {
        Ok(self.evaluate_gradient(xs, 1)?.pop().expect("dim 1"))
    }

    /// Parse the dictionary text format. Entries keep source order.
    pub fn parse(name: impl Into<String>, source: &str) -> Result<Self, BasisError> {
        let mut functions = Vec::new();
        for (line_idx, raw_line) in source.lines().enumerate() {
            let line_no = line_idx + 1;
            let line = match raw_line.find('#') {
                Some(p) => &raw_line[..p],
                None => raw_line,
            };
            let mut col_base = 0;
            for segment in line.split(';') {
                let col0 = col_base + 1;
                col_base += segment.len() + 1;
                if segment.trim().is_empty() {
                    continue;
                }
                functions.push(parse_entry(segment, line_no, col0)?);
            }
        }
        Dictionary::new(name, functions)
    }

    /// Serialize back to the text format (one entry per line). Fails for
    /// multivariate product entries, which have no text form.
    pub fn to_dsl(&self) -> Result<String, BasisError> {
        let mut out = String::new();
        for f in &self.functions {
            if f.factors.len() != 1 {
                return Err(BasisError::UnserializableProduct);
            }
            out.push_str(&f.factors[0].to_string());
            out.push('\n');
        }
        Ok(out)
    }

    /// Builtin reference dictionaries: `theta`, `theta_prime`, `theta_2d`
    /// (all K = 20) and the large pool `omega` (K = 100) that contains the
    /// first two as subsets.
    pub fn builtin(name: &str) -> Result<Self, BasisError> {
        match name {
            "theta" => Dictionary::new("theta", theta_entries()),
            "theta_prime" => Dictionary::new("theta_prime", theta_prime_entries()),
            "theta_2d" => Dictionary::new("theta_2d", theta_2d_entries()),
            "omega" => Dictionary::new("omega", omega_entries()),
            other => Err(BasisError::UnknownBuiltin(other.to_string())),
        }
    }

    /// Indices of the entries `[1, x, x^2, x^3]`, when all four are present.
    pub fn analytic_quartet(&self) -> Option<[usize; 4]> {
        let targets = [
            ScalarBasis::Const,
            ScalarBasis::Poly { k: 1 },
            ScalarBasis::Poly { k: 2 },
            ScalarBasis::Poly { k: 3 },
        ];
        let mut out = [0usize; 4];
        for (slot, t) in targets.iter().enumerate() {
            out[slot] = self.position_of(&BasisFunction::scalar(*t))?;
        }
        Some(out)
    }
}

struct EntryArgs<'a> {
    params: Vec<(usize, &'a str)>,
    idx: usize,
    line: usize,
    end_col: usize,
    kind: &'a str,
    segment: &'a str,
}

impl EntryArgs<'_> {
    fn need(&mut self, param: &str) -> Result<f64, BasisError> {
        let Some(&(tcol, tok)) = self.params.get(self.idx) else {
            return Err(BasisError::MissingParam {
                line: self.line,
                col: self.end_col,
                kind: self.kind.to_string(),
                param: param.to_string(),
            });
        };
        self.idx += 1;
        let v: f64 = tok.parse().map_err(|_| BasisError::BadNumber {
            line: self.line,
            col: tcol,
            token: tok.to_string(),
        })?;
        if !v.is_finite() {
            return Err(BasisError::NonFiniteParam {
                line: self.line,
                col: tcol,
                entry: self.segment.trim().to_string(),
            });
        }
        Ok(v)
    }

    fn optional(&mut self, param: &str, default: f64) -> Result<f64, BasisError> {
        if self.idx < self.params.len() {
            self.need(param)
        } else {
            Ok(default)
        }
    }

    fn finish(&self) -> Result<(), BasisError> {
        if let Some(&(tcol, tok)) = self.params.get(self.idx) {
            return Err(BasisError::TrailingToken {
                line: self.line,
                col: tcol,
                token: tok.to_string(),
            });
        }
        Ok(())
    }
}

fn parse_entry(segment: &str, line: usize, col0: usize) -> Result<BasisFunction, BasisError> {
    // token positions relative to the original line for error reporting
    let mut tokens: Vec<(usize, &str)> = Vec::new();
    let mut offset = 0;
    for piece in segment.split_whitespace() {
        let found = segment[offset..].find(piece).expect("piece comes from segment") + offset;
        tokens.push((col0 + found, piece));
        offset = found + piece.len();
    }
    let (kind_col, kind) = tokens[0];
    let mut args = EntryArgs {
        params: tokens[1..].to_vec(),
        idx: 0,
        line,
        end_col: col0 + segment.trim_end().len(),
        kind,
        segment,
    };

    let factor = match kind {
        "const" => ScalarBasis::Const,
        "poly" => {
            let (kcol, ktok) = args.params.first().copied().unwrap_or((kind_col, ""));
            let k = args.need("k")?;
            if k < 0.0 || k.fract() != 0.0 {
                return Err(BasisError::BadNumber { line, col: kcol, token: ktok.to_string() });
            }
            if k == 0.0 {
                ScalarBasis::Const
            } else {
                ScalarBasis::Poly { k: k as u32 }
            }
        }
        "sin" => ScalarBasis::Sin { a: args.need("a")? },
        "cos" => ScalarBasis::Cos { a: args.need("a")? },
        "tanh" => {
            let a = args.need("a")?;
            let b = args.optional("b", 0.0)?;
            ScalarBasis::Tanh { a, b }
        }
        "sech2" => {
            let a = args.need("a")?;
            let b = args.optional("b", 0.0)?;
            ScalarBasis::Sech2 { a, b }
        }
        "gauss" => {
            let a = args.need("a")?;
            let c = args.need("c")?;
            ScalarBasis::Gauss { a, c }
        }
        "tanh2shift" => ScalarBasis::Tanh2Shift { c: args.need("c")? },
        other => {
            return Err(BasisError::UnknownKind { line, col: kind_col, word: other.to_string() })
        }
    };

    args.finish()?;
    Ok(BasisFunction::scalar(factor))
}

/// A linear combination over a dictionary: sum_k c_k f_k. Fitted drift,
/// diffusion, and free-energy models all take this form.
#[derive(Debug, Clone)]
pub struct LinearModel {
    dict: Dictionary,
    coeffs: Vec<f64>,
}

impl LinearModel {
    pub fn new(dict: Dictionary, coeffs: Vec<f64>) -> Self {
        assert_eq!(dict.len(), coeffs.len(), "one coefficient per dictionary entry");
        LinearModel { dict, coeffs }
    }

    pub fn dictionary(&self) -> &Dictionary {
        &self.dict
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// Value of the combination at an m-dimensional point.
    pub fn eval(&self, point: &[f64]) -> f64 {
        self.dict
            .functions()
            .iter()
            .zip(&self.coeffs)
            .map(|(f, &c)| c * f.eval(point))
            .sum()
    }

    /// Gradient of the combination at an m-dimensional point.
    pub fn gradient(&self, point: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self
                .dict
                .functions()
                .iter()
                .zip(&self.coeffs)
                .map(|(f, &c)| c * f.partial(point, i))
                .sum();
        }
    }

    pub fn eval_1d(&self, x: f64) -> f64 {
        self.eval(std::slice::from_ref(&x))
    }

    pub fn deriv_1d(&self, x: f64) -> f64 {
        let mut g = [0.0];
        self.gradient(std::slice::from_ref(&x), &mut g);
        g[0]
    }
}

fn s(f: ScalarBasis) -> BasisFunction {
    BasisFunction::scalar(f)
}

/// Theta: [1, x, ..., x^10, sin x, cos x, sin 6x, cos 6x, sin 11x, cos 11x,
/// tanh 10x, 10 - 10 tanh^2(10x), exp(-50 x^2)].
fn theta_entries() -> Vec<BasisFunction> {
    let mut v = vec![s(ScalarBasis::Const)];
    for k in 1..=10 {
        v.push(s(ScalarBasis::Poly { k }));
    }
    for a in [1.0, 6.0, 11.0] {
        v.push(s(ScalarBasis::Sin { a }));
        v.push(s(ScalarBasis::Cos { a }));
    }
    v.push(s(ScalarBasis::Tanh { a: 10.0, b: 0.0 }));
    v.push(s(ScalarBasis::Sech2 { a: 10.0, b: 0.0 }));
    v.push(s(ScalarBasis::Gauss { a: 50.0, c: 0.0 }));
    v
}

/// Theta': the Gaussian/sigmoid-heavy 20-entry variant sharing [1, x, x^2, x^3].
fn theta_prime_entries() -> Vec<BasisFunction> {
    vec![
        s(ScalarBasis::Const),
        s(ScalarBasis::Poly { k: 1 }),
        s(ScalarBasis::Poly { k: 2 }),
        s(ScalarBasis::Poly { k: 3 }),
        s(ScalarBasis::Sin { a: 1.0 }),
        s(ScalarBasis::Cos { a: 11.0 }),
        s(ScalarBasis::Sin { a: 11.0 }),
        s(ScalarBasis::Sech2 { a: 10.0, b: 0.0 }),
        s(ScalarBasis::Sech2 { a: 10.0, b: 10.0 }),
        s(ScalarBasis::Gauss { a: 50.0, c: 0.0 }),
        s(ScalarBasis::Gauss { a: 50.0, c: 3.0 }),
        s(ScalarBasis::Gauss { a: 0.3, c: 0.0 }),
        s(ScalarBasis::Gauss { a: 0.3, c: 3.0 }),
        s(ScalarBasis::Gauss { a: 2.0, c: 2.0 }),
        s(ScalarBasis::Gauss { a: 2.0, c: 4.0 }),
        s(ScalarBasis::Gauss { a: 50.0, c: 4.0 }),
        s(ScalarBasis::Gauss { a: 0.6, c: 4.0 }),
        s(ScalarBasis::Gauss { a: 0.6, c: 3.0 }),
        s(ScalarBasis::Sech2 { a: 2.0, b: 4.0 }),
        s(ScalarBasis::Tanh2Shift { c: 4.0 }),
    ]
}

/// Theta'': the 20-entry dictionary for the projected angular coordinate,
/// containing 1 and sin 7x.
fn theta_2d_entries() -> Vec<BasisFunction> {
    let mut v = vec![s(ScalarBasis::Const)];
    for k in 1..=6 {
        v.push(s(ScalarBasis::Poly { k }));
    }
    for a in [1.0, 4.0, 7.0] {
        v.push(s(ScalarBasis::Sin { a }));
        v.push(s(ScalarBasis::Cos { a }));
    }
    v.push(s(ScalarBasis::Tanh { a: 10.0, b: 0.0 }));
    v.push(s(ScalarBasis::Sech2 { a: 10.0, b: 0.0 }));
    v.push(s(ScalarBasis::Gauss { a: 50.0, c: 0.0 }));
    v.push(s(ScalarBasis::Tanh { a: 2.0, b: 0.0 }));
    v.push(s(ScalarBasis::Sech2 { a: 2.0, b: 0.0 }));
    v.push(s(ScalarBasis::Gauss { a: 2.0, c: 0.0 }));
    v.push(s(ScalarBasis::Tanh { a: 1.0, b: 0.0 }));
    v
}

/// Omega: theta, then the non-duplicate entries of theta', then a fixed
/// parameter grid (frequencies 1..12, Gaussian widths {0.3, 0.6, 2, 50} and
/// centers -1..5) until the pool reaches 100 entries. The fill order is
/// fixed, so omega is identical across runs and platforms.
fn omega_entries() -> Vec<BasisFunction> {
    let mut v = theta_entries();
    let mut keys: std::collections::HashSet<String> =
        v.iter().map(BasisFunction::canonical_key).collect();
    let mut push = |v: &mut Vec<BasisFunction>, f: BasisFunction| {
        if v.len() < 100 && keys.insert(f.canonical_key()) {
            v.push(f);
        }
    };
    for f in theta_prime_entries() {
        push(&mut v, f);
    }
    for a in 1..=12 {
        push(&mut v, s(ScalarBasis::Sin { a: f64::from(a) }));
        push(&mut v, s(ScalarBasis::Cos { a: f64::from(a) }));
    }
    for a in 1..=12 {
        push(&mut v, s(ScalarBasis::Tanh { a: f64::from(a), b: 0.0 }));
    }
    for a in 1..=12 {
        push(&mut v, s(ScalarBasis::Sech2 { a: f64::from(a), b: 0.0 }));
    }
    for a in [0.3, 0.6, 2.0, 50.0] {
        for c in -1..=5 {
            push(&mut v, s(ScalarBasis::Gauss { a, c: f64::from(c) }));
        }
    }
    for c in -1..=5 {
        push(&mut v, s(ScalarBasis::Tanh2Shift { c: f64::from(c) }));
    }
    for k in 11..=16 {
        push(&mut v, s(ScalarBasis::Poly { k }));
    }
    assert_eq!(v.len(), 100, "omega fill grid exhausted early");
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn centered_fd(f: &ScalarBasis, x: f64) -> f64 {
        let h = 1e-6;
        (f.eval(x + h) - f.eval(x - h)) / (2.0 * h)
    }

    #[test]
    fn parse_single_monomial() {
        let d = Dictionary::parse("t", "poly 3").unwrap();
        assert_eq!(d.len(), 1);
        assert_relative_eq!(d.evaluate_1d(&[2.0]).unwrap()[(0, 0)], 8.0);
    }

    #[test]
    fn parse_theta_head() {
        let d = Dictionary::parse("t", "const; poly 1; poly 2; poly 3").unwrap();
        assert_eq!(d.len(), 4);
        let m = d.evaluate_1d(&[2.0]).unwrap();
        assert_eq!(m.as_slice(), &[1.0, 2.0, 4.0, 8.0]);
        let theta = Dictionary::builtin("theta").unwrap();
        for (i, f) in d.functions().iter().enumerate() {
            assert_eq!(theta.position_of(f), Some(i));
        }
    }

    #[test]
    fn parse_sin_entry() {
        let d = Dictionary::parse("t", "sin 7").unwrap();
        let m = d.evaluate_1d(&[std::f64::consts::PI / 14.0]).unwrap();
        assert_relative_eq!(m[(0, 0)], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn parse_errors_carry_position() {
        match Dictionary::parse("t", "const\nwarble 3") {
            Err(BasisError::UnknownKind { line: 2, col: 1, word }) => assert_eq!(word, "warble"),
            other => panic!("unexpected {other:?}"),
        }
        match Dictionary::parse("t", "poly") {
            Err(BasisError::MissingParam { line: 1, kind, .. }) => assert_eq!(kind, "poly"),
            other => panic!("unexpected {other:?}"),
        }
        match Dictionary::parse("t", "gauss 50 zap") {
            Err(BasisError::BadNumber { line: 1, token, .. }) => assert_eq!(token, "zap"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            Dictionary::parse("t", "poly 2; poly 2"),
            Err(BasisError::Duplicate { .. })
        ));
    }

    #[test]
    fn evaluate_rejects_non_finite_points() {
        let d = Dictionary::builtin("theta").unwrap();
        assert!(matches!(
            d.evaluate_1d(&[1.0, f64::NAN]),
            Err(BasisError::NonFinitePoint { row: 1 })
        ));
    }

    #[test]
    fn gradient_examples() {
        let d = Dictionary::parse("t", "poly 3; sin 7; gauss 50 3").unwrap();
        let g = d.evaluate_gradient_1d(&[2.0, 0.0, 3.0]).unwrap();
        assert_relative_eq!(g[(0, 0)], 12.0); // d/dx x^3 at 2
        assert_relative_eq!(g[(1, 1)], 7.0); // d/dx sin 7x at 0
        assert_relative_eq!(g[(2, 2)], 0.0); // Gaussian at its center
    }

    #[test]
    fn builtin_shapes() {
        let theta = Dictionary::builtin("theta").unwrap();
        let theta_prime = Dictionary::builtin("theta_prime").unwrap();
        let theta_2d = Dictionary::builtin("theta_2d").unwrap();
        let omega = Dictionary::builtin("omega").unwrap();
        assert_eq!(theta.len(), 20);
        assert_eq!(theta_prime.len(), 20);
        assert_eq!(theta_2d.len(), 20);
        assert_eq!(omega.len(), 100);
        // shared leading quartet
        assert_eq!(theta.analytic_quartet(), Some([0, 1, 2, 3]));
        assert_eq!(theta_prime.analytic_quartet(), Some([0, 1, 2, 3]));
        // theta_2d contains the constant and sin 7x
        assert!(theta_2d.position_of(&s(ScalarBasis::Const)).is_some());
        assert!(theta_2d.position_of(&s(ScalarBasis::Sin { a: 7.0 })).is_some());
        // omega contains theta and theta' as subsets
        for f in theta.functions().iter().chain(theta_prime.functions()) {
            assert!(omega.position_of(f).is_some(), "omega missing {}", f.name());
        }
        assert!(matches!(Dictionary::builtin("bogus"), Err(BasisError::UnknownBuiltin(_))));
    }

    #[test]
    fn dsl_round_trip_is_bit_identical() {
        let omega = Dictionary::builtin("omega").unwrap();
        let text = omega.to_dsl().unwrap();
        let back = Dictionary::parse("omega", &text).unwrap();
        let xs: Vec<f64> = (0..50).map(|i| -2.0 + 0.14 * f64::from(i)).collect();
        let a = omega.evaluate_1d(&xs).unwrap();
        let b = back.evaluate_1d(&xs).unwrap();
        assert_eq!(a.as_slice().len(), b.as_slice().len());
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn evaluation_concatenates_by_rows() {
        let d = Dictionary::builtin("theta").unwrap();
        let xs: Vec<f64> = (0..9).map(|i| f64::from(i) * 0.37 - 1.0).collect();
        let whole = d.evaluate_1d(&xs).unwrap();
        let first = d.evaluate_1d(&xs[..4]).unwrap();
        let second = d.evaluate_1d(&xs[4..]).unwrap();
        for l in 0..4 {
            for k in 0..d.len() {
                assert_eq!(whole[(l, k)].to_bits(), first[(l, k)].to_bits());
            }
        }
        for l in 0..5 {
            for k in 0..d.len() {
                assert_eq!(whole[(l + 4, k)].to_bits(), second[(l, k)].to_bits());
            }
        }
    }

    #[test]
    fn product_entries_evaluate_per_coordinate() {
        let f = BasisFunction::product(vec![
            ScalarBasis::Poly { k: 2 },
            ScalarBasis::Sin { a: 3.0 },
        ]);
        let p = [2.0, 0.5];
        assert_relative_eq!(f.eval(&p), 4.0 * (1.5f64).sin());
        assert_relative_eq!(f.partial(&p, 0), 2.0 * 2.0 * (1.5f64).sin());
        assert_relative_eq!(f.partial(&p, 1), 4.0 * 3.0 * (1.5f64).cos());

        let d = Dictionary::new("prod", vec![f]).unwrap();
        let g = d.evaluate_gradient(&p, 2).unwrap();
        assert_eq!(g.len(), 2);
        assert!(matches!(
            d.evaluate(&[1.0], 1),
            Err(BasisError::DimensionMismatch { got: 1, need: 2 })
        ));
    }

    proptest! {
        // Analytic derivative vs centered finite difference for every kind.
        #[test]
        fn derivative_matches_finite_difference(
            x in -5.0f64..5.0,
            a in 0.2f64..12.0,
            b in -4.0f64..4.0,
            c in -1.0f64..5.0,
            k in 1u32..8,
        ) {
            let kinds = [
                ScalarBasis::Const,
                ScalarBasis::Poly { k },
                ScalarBasis::Sin { a },
                ScalarBasis::Cos { a },
                ScalarBasis::Tanh { a, b },
                ScalarBasis::Sech2 { a, b },
                ScalarBasis::Gauss { a, c },
                ScalarBasis::Tanh2Shift { c },
            ];
            for f in kinds {
                let exact = f.deriv(x);
                let fd = centered_fd(&f, x);
                prop_assert!(exact.is_finite() && f.eval(x).is_finite());
                // relative tolerance 1e-6; the absolute floor covers saturated
                // tanh tails where the finite difference itself cancels out
                prop_assert!(
                    (exact - fd).abs() <= 1e-6 * exact.abs() + 1e-7,
                    "kind {f:?} at {x}: exact {exact}, fd {fd}"
                );
            }
        }
    }
}
