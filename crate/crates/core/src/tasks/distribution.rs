use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

const NODES_PER_PIECE: usize = 256;
const NORMALIZATION_TOL: f64 = 1e-8;

/// Named input ensembles on the Bloch sphere.
#[derive(Clone, Debug, PartialEq)]
pub enum Preset {
    UniformSphere,
    /// All mass on `θ = π/2`.
    Equator,
    /// Equal mass on `|0⟩` and `|1⟩`.
    Poles,
    /// Uniform over the band `θ0 ≤ θ ≤ θ1`.
    Belt { theta0: f64, theta1: f64 },
}

/// φ-independent density `f(θ)` over `dθ dφ`, with `∫f dθ dφ = 1`.
#[derive(Clone, Debug, PartialEq)]
pub enum Distribution {
    Preset(Preset),
    /// Piecewise-linear `f` through `(θ, f)` knots, zero outside the knots.
    Knots(Vec<(f64, f64)>),
}

impl Distribution {
    pub fn uniform_sphere() -> Self {
        Distribution::Preset(Preset::UniformSphere)
    }

    pub fn equator() -> Self {
        Distribution::Preset(Preset::Equator)
    }

    pub fn poles() -> Self {
        Distribution::Preset(Preset::Poles)
    }

    pub fn belt(theta0: f64, theta1: f64) -> Result<Self> {
        if !(theta0.is_finite() && theta1.is_finite() && 0.0 <= theta0 && theta0 < theta1 && theta1 <= PI) {
            return Err(Error::arg(format!("belt needs 0 ≤ θ0 < θ1 ≤ π, got ({theta0}, {theta1})")));
        }
        Ok(Distribution::Preset(Preset::Belt { theta0, theta1 }))
    }

    pub fn knots(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::arg("need at least two knots"));
        }
        for &(t, f) in &knots {
            if !(t.is_finite() && f.is_finite()) || !(0.0..=PI).contains(&t) || f < 0.0 {
                return Err(Error::arg(format!("knot ({t}, {f}) must have θ in [0, π] and f ≥ 0")));
            }
        }
        if knots.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::arg("knot angles must be strictly increasing"));
        }
        Ok(Distribution::Knots(knots))
    }

    /// `2π∫ f(θ) g(θ) dθ` for smooth `g`; `None` for point-mass presets.
    fn integrate(&self, g: impl Fn(f64) -> f64) -> Option<f64> {
        match self {
            Distribution::Preset(Preset::UniformSphere) => {
                Some(2.0 * PI * gauss(0.0, PI, |t| t.sin() / (4.0 * PI) * g(t)))
            }
            Distribution::Preset(Preset::Belt { theta0, theta1 }) => {
                let c = 2.0 * PI * (theta0.cos() - theta1.cos());
                Some(2.0 * PI * gauss(*theta0, *theta1, |t| t.sin() / c * g(t)))
            }
            Distribution::Knots(k) => Some(
                2.0 * PI
                    * k.windows(2)
                        .map(|w| {
                            let ((t0, f0), (t1, f1)) = (w[0], w[1]);
                            let slope = (f1 - f0) / (t1 - t0);
                            gauss(t0, t1, |t| (f0 + slope * (t - t0)) * g(t))
                        })
                        .sum::<f64>(),
            ),
            Distribution::Preset(Preset::Equator | Preset::Poles) => None,
        }
    }

    /// Expectation of `g(θ)` under the distribution.
    fn average(&self, g: impl Fn(f64) -> f64) -> f64 {
        match self {
            Distribution::Preset(Preset::Equator) => g(PI / 2.0),
            Distribution::Preset(Preset::Poles) => 0.5 * (g(0.0) + g(PI)),
            _ => self.integrate(g).expect("smooth density"),
        }
    }

    /// `∫f dθ dφ`.
    pub fn total_mass(&self) -> f64 {
        self.average(|_| 1.0)
    }

    pub fn is_normalized(&self) -> bool {
        (self.total_mass() - 1.0).abs() <= NORMALIZATION_TOL
    }

    /// The same knot table scaled to unit mass; presets are returned as is.
    pub fn normalized(&self) -> Result<Self> {
        match self {
            Distribution::Knots(k) => {
                let mass = self.total_mass();
                if mass <= 0.0 {
                    return Err(Error::arg("distribution has zero mass"));
                }
                Ok(Distribution::Knots(k.iter().map(|&(t, f)| (t, f / mass)).collect()))
            }
            other => Ok(other.clone()),
        }
    }
}

/// `Γ = ¼∫f sin²θ dθ dφ`.
pub fn gamma_of(dist: &Distribution) -> Result<f64> {
    let mass = dist.total_mass();
    if (mass - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::arg(format!("distribution integrates to {mass}, not 1")));
    }
    Ok(0.25 * dist.average(|t| t.sin().powi(2)))
}

/// The four integrals that must vanish for the qubit cloning operator to take
/// its Γ form: `∫f cosθ`, `∫f e^{iφ} sinθ`, `∫f e^{iφ} sin2θ`, `∫f e^{2iφ} sin²θ`
/// (absolute values). The last three vanish identically for φ-independent `f`.
pub fn validate_phase_covariance(dist: &Distribution) -> [f64; 4] {
    [dist.average(f64::cos).abs(), 0.0, 0.0, 0.0]
}

/// Composite Gauss-Legendre quadrature of `f` over one piece.
fn gauss(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (x, w) = legendre_rule();
    let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
    half * x.iter().zip(w).map(|(&xi, &wi)| wi * f(mid + half * xi)).sum::<f64>()
}

fn legendre_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(NODES_PER_PIECE))
}

/// Nodes and weights on `[-1, 1]` by Newton iteration on `P_n`.
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}
