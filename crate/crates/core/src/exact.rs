//! Closed-form spectrum, exceptional points and eigenfunctions.

use std::fmt;

use num_complex::Complex64;

/// Default distance below which `α` counts as an integer (an exceptional point).
pub const DEFAULT_INTEGER_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParamError {
    #[error("contour shift c must be strictly positive, got {0}")]
    NonPositiveShift(f64),
    #[error("alpha must be a finite non-negative number, got {0}")]
    InvalidAlpha(f64),
    #[error("coupling G must be finite, got {0}")]
    InvalidCoupling(f64),
    #[error("broken PT phase (G = {0} < -1/4): eigenfunctions with real alpha do not exist")]
    BrokenPhase(f64),
}

/// Value of `α = √(G + 1/4)`.
///
/// Below `G = -1/4` the square root leaves the real axis; the positive
/// imaginary branch is kept and the broken PT phase is reported through
/// [`Alpha::is_broken_phase`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Alpha {
    Real(f64),
    /// `α = i·β` with `β > 0`.
    Imaginary(f64),
}

impl Alpha {
    pub fn is_broken_phase(self) -> bool {
        matches!(self, Alpha::Imaginary(_))
    }

    pub fn to_complex(self) -> Complex64 {
        match self {
            Alpha::Real(a) => Complex64::new(a, 0.0),
            Alpha::Imaginary(b) => Complex64::new(0.0, b),
        }
    }

    pub fn real(self) -> Option<f64> {
        match self {
            Alpha::Real(a) => Some(a),
            Alpha::Imaginary(_) => None,
        }
    }
}

/// Returns `√(G + 1/4)`, on the positive imaginary branch when `G < -1/4`.
pub fn alpha_from_coupling(coupling: f64) -> Alpha {
    let arg = coupling + 0.25;
    if arg >= 0.0 {
        Alpha::Real(arg.sqrt())
    } else {
        Alpha::Imaginary((-arg).sqrt())
    }
}

/// Coupling `G = K² - 1/4` of the `K`-th exceptional point.
pub fn ep_location(k: u32) -> f64 {
    let k = f64::from(k);
    k * k - 0.25
}

/// Lemma-1 regime: a unitary interpretation exists only for `α > 0` off the integers.
pub fn is_unitary_regime(alpha: f64) -> bool {
    is_unitary_regime_with(alpha, DEFAULT_INTEGER_TOLERANCE)
}

pub fn is_unitary_regime_with(alpha: f64, integer_tolerance: f64) -> bool {
    alpha.is_finite() && alpha > 0.0 && (alpha - alpha.round()).abs() > integer_tolerance
}

/// Dynamical parameters: coupling `G`, its `α`, and the contour shift `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    alpha: Alpha,
    coupling: f64,
    shift: f64,
}

impl ModelParams {
    pub fn from_alpha(alpha: f64, shift: f64) -> Result<Self, ParamError> {
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(ParamError::InvalidAlpha(alpha));
        }
        check_shift(shift)?;
        Ok(Self {
            alpha: Alpha::Real(alpha),
            coupling: alpha * alpha - 0.25,
            shift,
        })
    }

    pub fn from_coupling(coupling: f64, shift: f64) -> Result<Self, ParamError> {
        if !coupling.is_finite() {
            return Err(ParamError::InvalidCoupling(coupling));
        }
        check_shift(shift)?;
        Ok(Self {
            alpha: alpha_from_coupling(coupling),
            coupling,
            shift,
        })
    }

    pub fn alpha(&self) -> Alpha {
        self.alpha
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn is_broken_phase(&self) -> bool {
        self.alpha.is_broken_phase()
    }
}

fn check_shift(shift: f64) -> Result<(), ParamError> {
    if shift.is_finite() && shift > 0.0 {
        Ok(())
    } else {
        Err(ParamError::NonPositiveShift(shift))
    }
}

/// Quasi-parity `Q = ±1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QuasiParity {
    Plus,
    Minus,
}

impl QuasiParity {
    pub fn sign(self) -> f64 {
        match self {
            QuasiParity::Plus => 1.0,
            QuasiParity::Minus => -1.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            QuasiParity::Plus => 1,
            QuasiParity::Minus => -1,
        }
    }

    pub fn from_sign(sign: i64) -> Option<Self> {
        match sign {
            1 => Some(QuasiParity::Plus),
            -1 => Some(QuasiParity::Minus),
            _ => None,
        }
    }

    pub const BOTH: [QuasiParity; 2] = [QuasiParity::Plus, QuasiParity::Minus];
}

/// Level `E_n^(Q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LevelLabel {
    pub n: u32,
    pub q: QuasiParity,
}

impl LevelLabel {
    pub fn new(n: u32, q: QuasiParity) -> Self {
        Self { n, q }
    }

    pub fn plus(n: u32) -> Self {
        Self::new(n, QuasiParity::Plus)
    }

    pub fn minus(n: u32) -> Self {
        Self::new(n, QuasiParity::Minus)
    }
}

impl fmt::Display for LevelLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.q {
            QuasiParity::Plus => '+',
            QuasiParity::Minus => '-',
        };
        write!(f, "E_{}^({})", self.n, s)
    }
}

/// `E_n^(Q) = 4n + 2 - 2Qα`.
pub fn energy(label: LevelLabel, alpha: f64) -> f64 {
    4.0 * f64::from(label.n) + 2.0 - 2.0 * label.q.sign() * alpha
}

/// Analytic continuation of [`energy`] to complex `α` (broken phase).
pub fn energy_complex(label: LevelLabel, alpha: Alpha) -> Complex64 {
    let base = 4.0 * f64::from(label.n) + 2.0;
    Complex64::new(base, 0.0) - 2.0 * label.q.sign() * alpha.to_complex()
}

/// Generalized Laguerre polynomial `L_n^(a)(z)` by forward three-term recurrence.
pub fn laguerre(n: u32, a: f64, z: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    if n == 0 {
        return one;
    }
    let mut prev = one;
    let mut cur = one + a - z;
    for k in 1..n {
        let k = f64::from(k);
        let next = ((2.0 * k + 1.0 + a - z) * cur - (k + a) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Unnormalized bound state
/// `(x-ic)^(-Qα+1/2) exp(-(x-ic)²/2) L_n^(-Qα)((x-ic)²)` on the shifted contour.
///
/// The power uses the principal branch; `Im(x - ic) = -c < 0` keeps the whole
/// contour off the cut.
pub fn wavefunction(label: LevelLabel, params: &ModelParams, x: f64) -> Result<Complex64, ParamError> {
    let alpha = params
        .alpha()
        .real()
        .ok_or(ParamError::BrokenPhase(params.coupling()))?;
    let r = Complex64::new(x, -params.shift());
    let r2 = r * r;
    let a = -label.q.sign() * alpha;
    Ok(r.powc(Complex64::new(a + 0.5, 0.0)) * (-r2 / 2.0).exp() * laguerre(label.n, a, r2))
}

/// One energy row of a degeneracy table.
#[derive(Debug, Clone, PartialEq)]
pub struct DegeneracyRow {
    pub energy: f64,
    pub members: Vec<LevelLabel>,
}

impl DegeneracyRow {
    pub fn is_degenerate(&self) -> bool {
        self.members.len() > 1
    }
}

/// Levels at `α = K`, grouped by energy.
#[derive(Debug, Clone, PartialEq)]
pub struct DegeneracyTable {
    pub k: u32,
    pub rows: Vec<DegeneracyRow>,
}

impl DegeneracyTable {
    pub fn row_at(&self, energy: f64) -> Option<&DegeneracyRow> {
        self.rows.iter().find(|r| r.energy == energy)
    }
}

/// Enumerates every level with `E ≤ e_max` at the exceptional point `α = K`.
///
/// Energies are integers there, so grouping uses exact equality. Members of a
/// row are ordered by `n`, then `+` before `-`.
pub fn degeneracy_table(k: u32, e_max: f64) -> DegeneracyTable {
    let alpha = f64::from(k);
    let mut levels: Vec<(f64, LevelLabel)> = Vec::new();
    for q in QuasiParity::BOTH {
        let mut n = 0u32;
        loop {
            let label = LevelLabel::new(n, q);
            let e = energy(label, alpha);
            if e > e_max {
                break;
            }
            levels.push((e, label));
            n += 1;
        }
    }
    levels.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut rows: Vec<DegeneracyRow> = Vec::new();
    for (e, label) in levels {
        match rows.last_mut() {
            Some(row) if row.energy == e => row.members.push(label),
            _ => rows.push(DegeneracyRow {
                energy: e,
                members: vec![label],
            }),
        }
    }
    DegeneracyTable { k, rows }
}
