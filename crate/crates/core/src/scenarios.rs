//! Named, reproducible experiment definitions: grid, coefficients, boundary
//! data and the checks to run on the solved field.
//!
//! Descriptors serialize to plain [`Section`]s of `key = value` entries; the
//! text form of those sections is handled by the front-end.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exact::{HProfile, PolynomialCaloricProfile, Profile, ProfileSpec, WStarProfile};
use crate::geometry::GridSpec;
use crate::solver::{BoundaryData, CoefficientField, CoefficientPair};

/// Seed used by the perturbation scenarios unless overridden.
pub const DEFAULT_SEED: u64 = 7;

/// Number of waves in the boundary perturbation of `branch-generic`.
const PERTURBATION_MODES: usize = 3;

const CATALOGUE: &[(&str, &str)] = &[
    ("h-exact", "one-dimensional two-phase profile as boundary data; the solve reproduces it"),
    ("wstar-exact", "global two-phase profile along the last axis; the solve reproduces it"),
    ("poly-caloric", "caloric quadratic -a0 t + sum a_i x_i^2 on t in [-1, 0]"),
    ("branch-generic", "perturbed two-phase profile with wobbling coefficients and branch points"),
    ("branch-generic-wide", "branch-generic on a wide box, for kernel-weighted energies"),
    ("one-phase-contact", "one-phase solution on x1 >= 0 whose free boundary leaves the wall at t = 0"),
    ("reflected-counterexample", "odd reflection of one-phase-contact: a two-phase solution"),
    ("forward-pair", "two boundary data agreeing on the parabolic boundary only"),
];

/// Names of all catalogue scenarios with a one-line summary.
pub fn list() -> Vec<(&'static str, &'static str)> {
    CATALOGUE.to_vec()
}

fn available() -> Vec<String> {
    CATALOGUE.iter().map(|(n, _)| n.to_string()).collect()
}

/// One `sin` wave `amplitude · sin(time_frequency·t + frequencies·x + phase)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Wave {
    pub amplitude: f64,
    pub time_frequency: f64,
    pub frequencies: Vec<f64>,
    pub phase: f64,
}

impl Wave {
    pub fn eval(&self, t: f64, x: &[f64]) -> f64 {
        let arg = self.time_frequency * t
            + self.frequencies.iter().zip(x).map(|(k, v)| k * v).sum::<f64>()
            + self.phase;
        self.amplitude * arg.sin()
    }

    /// Space-time wavevector of length `wavenumber` in a random direction.
    fn random(rng: &mut ChaCha8Rng, n: usize, amplitude: f64, wavenumber: f64) -> Self {
        let mut k: Vec<f64> = (0..=n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = k.iter().map(|c| c * c).sum::<f64>().sqrt().max(1e-12);
        for c in &mut k {
            *c *= wavenumber / norm;
        }
        let phase = rng.random_range(0.0..std::f64::consts::TAU);
        Self {
            amplitude,
            time_frequency: k[0],
            frequencies: k[1..].to_vec(),
            phase,
        }
    }
}

/// Serializable boundary data.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundarySpec {
    Profile(ProfileSpec),
    /// `λ₊(t,x)/2 max(s,0)² − λ₋(t,x)/2 max(−s,0)²` with the scenario's
    /// coefficients and `s = x·direction + amplitude · q(t, x)`, where `q`
    /// is a sum of seeded waves with weights summing to one.
    PerturbedH {
        direction: Vec<f64>,
        amplitude: f64,
        wavenumber: f64,
        seed: u64,
    },
    /// `a(t) x₁ + x₁²/2` with `a = −κt` for `t ≤ 0`, and
    /// `max(x₁ − c t, 0)²/2` for `t > 0`.
    OnePhaseContact { kappa: f64, speed: f64 },
    /// `base + amplitude · (t − t₀)/(T − t₀) · Π 4(xᵢ − loᵢ)(hiᵢ − xᵢ)/(hiᵢ − loᵢ)²`
    /// on the scenario box: the bump vanishes on the parabolic boundary.
    InteriorBump { base: Box<BoundarySpec>, amplitude: f64 },
}

impl BoundarySpec {
    pub fn kind(&self) -> &'static str {
        match self {
            BoundarySpec::Profile(p) => p.kind(),
            BoundarySpec::PerturbedH { .. } => "perturbed-h",
            BoundarySpec::OnePhaseContact { .. } => "one-phase-contact",
            BoundarySpec::InteriorBump { .. } => "interior-bump",
        }
    }

    /// Seeded waves of a [`BoundarySpec::PerturbedH`]; empty otherwise.
    pub fn perturbation_waves(&self, n: usize) -> Vec<Wave> {
        match self {
            BoundarySpec::PerturbedH { wavenumber, seed, .. } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let weights: Vec<f64> = (0..PERTURBATION_MODES).map(|_| rng.random_range(0.5..1.0)).collect();
                let total: f64 = weights.iter().sum();
                weights
                    .into_iter()
                    .map(|w| Wave::random(&mut rng, n, w / total, *wavenumber))
                    .collect()
            }
            _ => Vec::new(),
        }
    }

    /// Data as a function on the box of `grid`.
    pub fn data(&self, grid: &GridSpec, coeffs: &CoefficientPair) -> Result<BoundaryData> {
        let n = grid.dim();
        Ok(match self {
            BoundarySpec::Profile(p) => {
                p.value(grid.t_start(), grid.lower())?;
                BoundaryData::from_profile(n, p.clone())
            }
            BoundarySpec::PerturbedH {
                direction, amplitude, ..
            } => {
                // validates and normalizes the direction
                let h = HProfile::new(1.0, 1.0, direction.clone())?;
                if h.direction().len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: h.direction().len(),
                    });
                }
                let dir = h.direction().to_vec();
                let waves = self.perturbation_waves(n);
                let amplitude = *amplitude;
                let coeffs = coeffs.clone();
                BoundaryData::new(n, move |t, x| {
                    let q: f64 = waves.iter().map(|w| w.eval(t, x)).sum();
                    let s = dir.iter().zip(x).map(|(d, v)| d * v).sum::<f64>() + amplitude * q;
                    if s >= 0.0 {
                        0.5 * coeffs.plus.eval(t, x) * s * s
                    } else {
                        -0.5 * coeffs.minus.eval(t, x) * s * s
                    }
                })
            }
            BoundarySpec::OnePhaseContact { kappa, speed } => {
                let (kappa, speed) = (*kappa, *speed);
                BoundaryData::new(n, move |t, x| {
                    let x1 = x[0];
                    if t <= 0.0 {
                        -kappa * t * x1 + 0.5 * x1 * x1
                    } else {
                        0.5 * (x1 - speed * t).max(0.0).powi(2)
                    }
                })
            }
            BoundarySpec::InteriorBump { base, amplitude } => {
                let inner = base.data(grid, coeffs)?;
                let lo = grid.lower().to_vec();
                let hi = grid.upper().to_vec();
                let (t0, t1) = (grid.t_start(), grid.t_end());
                let amplitude = *amplitude;
                BoundaryData::new(n, move |t, x| {
                    let mut bump = amplitude * (t - t0) / (t1 - t0);
                    for a in 0..x.len() {
                        let w = hi[a] - lo[a];
                        bump *= 4.0 * (x[a] - lo[a]) * (hi[a] - x[a]) / (w * w);
                    }
                    inner.eval(t, x) + bump
                })
            }
        })
    }

    /// The closed-form solution, when the data is one.
    pub fn exact(&self) -> Option<&ProfileSpec> {
        match self {
            BoundarySpec::Profile(p) => Some(p),
            _ => None,
        }
    }

    fn params(&self) -> Vec<(String, String)> {
        let kv = |k: &str, v: String| (k.to_string(), v);
        let mut out = vec![kv("kind", self.kind().to_string())];
        match self {
            BoundarySpec::Profile(p) => out.extend(p.params()),
            BoundarySpec::PerturbedH {
                direction,
                amplitude,
                wavenumber,
                seed,
            } => out.extend([
                kv("direction", join(direction)),
                kv("amplitude", amplitude.to_string()),
                kv("wavenumber", wavenumber.to_string()),
                kv("seed", seed.to_string()),
            ]),
            BoundarySpec::OnePhaseContact { kappa, speed } => {
                out.extend([kv("kappa", kappa.to_string()), kv("speed", speed.to_string())])
            }
            BoundarySpec::InteriorBump { base, amplitude } => {
                out.push(kv("amplitude", amplitude.to_string()));
                for (k, v) in base.params() {
                    out.push((format!("base.{k}"), v));
                }
            }
        }
        out
    }

    fn from_params(section: &Section) -> Result<Self> {
        let kind = section.get("kind")?;
        let rest: Vec<(String, String)> = section.entries.iter().filter(|(k, _)| k != "kind").cloned().collect();
        let sub = Section {
            name: section.name.clone(),
            entries: rest.clone(),
        };
        match kind {
            "perturbed-h" => {
                sub.only(&["direction", "amplitude", "wavenumber", "seed"])?;
                Ok(BoundarySpec::PerturbedH {
                    direction: sub.nums("direction")?,
                    amplitude: sub.num("amplitude")?,
                    wavenumber: sub.num("wavenumber")?,
                    seed: sub.int("seed")?,
                })
            }
            "one-phase-contact" => {
                sub.only(&["kappa", "speed"])?;
                Ok(BoundarySpec::OnePhaseContact {
                    kappa: sub.num("kappa")?,
                    speed: sub.num("speed")?,
                })
            }
            "interior-bump" => {
                let base = Section {
                    name: section.name.clone(),
                    entries: rest
                        .iter()
                        .filter_map(|(k, v)| k.strip_prefix("base.").map(|k| (k.to_string(), v.clone())))
                        .collect(),
                };
                if let Some((k, _)) = rest.iter().find(|(k, _)| k != "amplitude" && !k.starts_with("base.")) {
                    return Err(Error::Malformed(format!("unrecognized key `{k}` in [{}]", section.name)));
                }
                Ok(BoundarySpec::InteriorBump {
                    base: Box::new(Self::from_params(&base)?),
                    amplitude: sub.num("amplitude")?,
                })
            }
            other => Ok(BoundarySpec::Profile(ProfileSpec::from_params(other, &rest)?)),
        }
    }
}

/// Post-processing applied to the solved field before the checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    None,
    /// Odd reflection across `{x₁ = 0}`.
    ReflectOdd,
}

/// A check and its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Check {
    /// Maximal nodal error against the closed-form solution.
    ExactError { tol: f64 },
    /// Discrete residual of the equation away from the free boundary.
    Residual { tol: f64 },
    /// Nondegeneracy at every extracted free-boundary point whose `Q_{2r}`
    /// fits into the box.
    Nondegeneracy { radii: Vec<f64> },
    /// Kernel-weighted energies of `(∂ₑu)±` at the detected branch point.
    Monotonicity { direction: Vec<f64>, radii: Vec<f64>, tol: f64 },
    /// Directional and tempo-spatial monotonicity of the blow-up at
    /// radius `r` around the detected branch point.
    Directional {
        r: f64,
        epsilon: f64,
        directions: usize,
        alphas: Vec<f64>,
        tol_factor: f64,
    },
    /// Closeness to the profile and decay of `sup |∂ₜu|` over shrinking
    /// cylinders at the detected branch point.
    Closeness { radii: Vec<f64>, sigma: f64 },
    /// Graph fit of `∂{u>0}` in `direction` on `Q_radius` around the
    /// detected branch point: Lipschitz norms and normal continuity.
    Graph { direction: Vec<f64>, radius: f64, bins: Vec<f64> },
    /// Oddness of the reflected field.
    Oddness,
    /// Temporal difference quotient of `∂{u>0}` near the contact point.
    TemporalQuotient { radius: f64 },
    /// Solves the partner data and compares.
    ForwardUniqueness { tol: f64 },
}

impl Check {
    pub const NAMES: &'static [&'static str] = &[
        "exact-error",
        "residual",
        "nondegeneracy",
        "monotonicity",
        "directional",
        "closeness",
        "graph",
        "oddness",
        "temporal-quotient",
        "forward-uniqueness",
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Check::ExactError { .. } => "exact-error",
            Check::Residual { .. } => "residual",
            Check::Nondegeneracy { .. } => "nondegeneracy",
            Check::Monotonicity { .. } => "monotonicity",
            Check::Directional { .. } => "directional",
            Check::Closeness { .. } => "closeness",
            Check::Graph { .. } => "graph",
            Check::Oddness => "oddness",
            Check::TemporalQuotient { .. } => "temporal-quotient",
            Check::ForwardUniqueness { .. } => "forward-uniqueness",
        }
    }

    fn params(&self) -> Vec<(String, String)> {
        let kv = |k: &str, v: String| (k.to_string(), v);
        match self {
            Check::ExactError { tol } | Check::Residual { tol } | Check::ForwardUniqueness { tol } => {
                vec![kv("tol", tol.to_string())]
            }
            Check::Nondegeneracy { radii } => vec![kv("radii", join(radii))],
            Check::Monotonicity { direction, radii, tol } => vec![
                kv("direction", join(direction)),
                kv("radii", join(radii)),
                kv("tol", tol.to_string()),
            ],
            Check::Directional {
                r,
                epsilon,
                directions,
                alphas,
                tol_factor,
            } => vec![
                kv("r", r.to_string()),
                kv("epsilon", epsilon.to_string()),
                kv("directions", directions.to_string()),
                kv("alphas", join(alphas)),
                kv("tol_factor", tol_factor.to_string()),
            ],
            Check::Closeness { radii, sigma } => vec![kv("radii", join(radii)), kv("sigma", sigma.to_string())],
            Check::Graph { direction, radius, bins } => vec![
                kv("direction", join(direction)),
                kv("radius", radius.to_string()),
                kv("bins", join(bins)),
            ],
            Check::Oddness => Vec::new(),
            Check::TemporalQuotient { radius } => vec![kv("radius", radius.to_string())],
        }
    }

    fn from_section(name: &str, s: &Section) -> Result<Self> {
        Ok(match name {
            "exact-error" => {
                s.only(&["tol"])?;
                Check::ExactError { tol: s.num("tol")? }
            }
            "residual" => {
                s.only(&["tol"])?;
                Check::Residual { tol: s.num("tol")? }
            }
            "forward-uniqueness" => {
                s.only(&["tol"])?;
                Check::ForwardUniqueness { tol: s.num("tol")? }
            }
            "nondegeneracy" => {
                s.only(&["radii"])?;
                Check::Nondegeneracy { radii: s.nums("radii")? }
            }
            "monotonicity" => {
                s.only(&["direction", "radii", "tol"])?;
                Check::Monotonicity {
                    direction: s.nums("direction")?,
                    radii: s.nums("radii")?,
                    tol: s.num("tol")?,
                }
            }
            "directional" => {
                s.only(&["r", "epsilon", "directions", "alphas", "tol_factor"])?;
                Check::Directional {
                    r: s.num("r")?,
                    epsilon: s.num("epsilon")?,
                    directions: s.int("directions")? as usize,
                    alphas: s.nums("alphas")?,
                    tol_factor: s.num("tol_factor")?,
                }
            }
            "closeness" => {
                s.only(&["radii", "sigma"])?;
                Check::Closeness {
                    radii: s.nums("radii")?,
                    sigma: s.num("sigma")?,
                }
            }
            "graph" => {
                s.only(&["direction", "radius", "bins"])?;
                Check::Graph {
                    direction: s.nums("direction")?,
                    radius: s.num("radius")?,
                    bins: s.nums("bins")?,
                }
            }
            "oddness" => {
                s.only(&[])?;
                Check::Oddness
            }
            "temporal-quotient" => {
                s.only(&["radius"])?;
                Check::TemporalQuotient { radius: s.num("radius")? }
            }
            other => {
                return Err(Error::Malformed(format!(
                    "unknown check `{other}`; known: {}",
                    Check::NAMES.join(", ")
                )))
            }
        })
    }
}

/// A fully specified experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub grid: GridSpec,
    pub coefficients: CoefficientPair,
    pub boundary: BoundarySpec,
    /// Second data set solved alongside the first (forward pairs).
    pub partner: Option<BoundarySpec>,
    pub transform: Transform,
    pub checks: Vec<Check>,
    pub seed: Option<u64>,
}

/// Resolution and seed overrides applied by [`build`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    /// Nodes along the longest spatial axis.
    pub nodes: Option<usize>,
    pub dt: Option<f64>,
    pub seed: Option<u64>,
}

fn box_grid(lower: Vec<f64>, upper: Vec<f64>, t: (f64, f64), h: f64, dt: f64, o: &Overrides) -> Result<GridSpec> {
    let longest = lower.iter().zip(&upper).map(|(a, b)| b - a).fold(0.0, f64::max);
    let h = match o.nodes {
        Some(n) if n < 3 => return Err(Error::GridTooSmall(format!("need at least 3 nodes per axis, got {n}"))),
        Some(n) => longest / (n - 1) as f64,
        None => h,
    };
    GridSpec::new(lower, upper, h, t, o.dt.unwrap_or(dt))
}

fn square(half: f64, t: (f64, f64), h: f64, dt: f64, o: &Overrides) -> Result<GridSpec> {
    box_grid(vec![-half; 2], vec![half; 2], t, h, dt, o)
}

const H: f64 = 1.0 / 32.0;
const DT: f64 = 1.0 / 64.0;

/// Coefficient wobble and boundary perturbation amplitude of the branch
/// scenarios, small enough for the closeness gate at `r = 1/4`.
pub const BRANCH_WOBBLE: f64 = 0.0125;
pub const BRANCH_AMPLITUDE: f64 = 0.005;

fn branch_coefficients(seed: u64, wobble: f64, wavenumber: f64) -> Result<CoefficientPair> {
    // a stream separate from the boundary perturbation
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_c0ef);
    let mut field = || {
        let w = Wave::random(&mut rng, 2, wobble, wavenumber);
        CoefficientField::Wave {
            base: 1.0,
            amplitude: w.amplitude,
            time_frequency: w.time_frequency,
            frequencies: w.frequencies,
            phase: w.phase,
        }
    };
    let plus = field();
    let minus = field();
    CoefficientPair::new(plus, minus)
}

fn branch_checks(wide: bool) -> Vec<Check> {
    if wide {
        return vec![Check::Monotonicity {
            direction: vec![0.0, 1.0],
            radii: vec![0.125, 1.0 / 6.0, 0.25, 0.5],
            tol: 1e-3,
        }];
    }
    vec![
        Check::Residual { tol: 1e-6 },
        Check::Nondegeneracy {
            radii: vec![0.125, 0.25],
        },
        Check::Directional {
            r: 0.25,
            epsilon: 0.5,
            directions: 16,
            alphas: vec![-1.0, 0.0, 1.0],
            tol_factor: 1.0,
        },
        Check::Closeness {
            radii: vec![0.25, 0.125, 0.0625],
            sigma: 0.1,
        },
        Check::Graph {
            direction: vec![1.0, 0.0],
            radius: 0.5,
            bins: vec![0.0625, 0.125, 0.25, 0.5],
        },
    ]
}

/// Builds a catalogue scenario.
pub fn build(name: &str, o: &Overrides) -> Result<Scenario> {
    let seedless = |grid: GridSpec, coefficients, boundary, checks| Scenario {
        name: name.to_string(),
        grid,
        coefficients,
        boundary,
        partner: None,
        transform: Transform::None,
        checks,
        seed: None,
    };
    let exact_checks = || vec![Check::ExactError { tol: 5e-3 }, Check::Residual { tol: 1e-6 }];
    Ok(match name {
        "h-exact" => seedless(
            square(1.0, (-1.0, 1.0), H, DT, o)?,
            CoefficientPair::constant(1.0, 2.0)?,
            BoundarySpec::Profile(ProfileSpec::H(HProfile::along_e1(1.0, 2.0, 2)?)),
            exact_checks(),
        ),
        "wstar-exact" => seedless(
            square(1.0, (-1.0, 1.0), H, DT, o)?,
            CoefficientPair::constant(2.0, 1.0)?,
            BoundarySpec::Profile(ProfileSpec::WStar(WStarProfile::along_en(2.0, 1.0, 2)?)),
            exact_checks(),
        ),
        "poly-caloric" => seedless(
            square(1.0, (-1.0, 0.0), H, DT, o)?,
            CoefficientPair::constant(1.0, 1.0)?,
            BoundarySpec::Profile(ProfileSpec::Polynomial(PolynomialCaloricProfile::new(
                0.5,
                vec![0.125, 0.125],
                1.0,
            )?)),
            exact_checks(),
        ),
        "branch-generic" | "branch-generic-wide" => {
            let wide = name.ends_with("wide");
            let seed = o.seed.unwrap_or(DEFAULT_SEED);
            let grid = if wide {
                square(6.0, (-0.5, 0.25), 1.0 / 16.0, DT, o)?
            } else {
                square(1.0, (-1.0, 1.0), H, DT, o)?
            };
            Scenario {
                name: name.to_string(),
                grid,
                coefficients: branch_coefficients(seed, BRANCH_WOBBLE, 0.25)?,
                boundary: BoundarySpec::PerturbedH {
                    direction: vec![1.0, 0.0],
                    amplitude: BRANCH_AMPLITUDE,
                    wavenumber: 1.0,
                    seed,
                },
                partner: None,
                transform: Transform::None,
                checks: branch_checks(wide),
                seed: Some(seed),
            }
        }
        "one-phase-contact" | "reflected-counterexample" => {
            let reflected = name.starts_with("reflected");
            let grid = box_grid(vec![0.0, -1.0], vec![1.0, 1.0], (-1.0, 1.0), H, DT, o)?;
            let checks = if reflected {
                vec![
                    Check::Oddness,
                    Check::Graph {
                        direction: vec![1.0, 0.0],
                        radius: 0.5,
                        bins: vec![0.0625, 0.125, 0.25, 0.5],
                    },
                    Check::TemporalQuotient { radius: 0.5 },
                ]
            } else {
                vec![Check::Residual { tol: 1e-6 }]
            };
            Scenario {
                transform: if reflected { Transform::ReflectOdd } else { Transform::None },
                ..seedless(
                    grid,
                    CoefficientPair::constant(1.0, 1.0)?,
                    BoundarySpec::OnePhaseContact { kappa: 0.5, speed: 0.5 },
                    checks,
                )
            }
        }
        "forward-pair" => {
            let base = BoundarySpec::Profile(ProfileSpec::H(HProfile::new(
                1.0,
                2.0,
                vec![0.3f64.cos(), 0.3f64.sin()],
            )?));
            Scenario {
                partner: Some(BoundarySpec::InteriorBump {
                    base: Box::new(base.clone()),
                    amplitude: 0.05,
                }),
                ..seedless(
                    square(1.0, (-1.0, 1.0), H, DT, o)?,
                    CoefficientPair::constant(1.0, 2.0)?,
                    base,
                    vec![Check::ForwardUniqueness { tol: 1e-10 }],
                )
            }
        }
        other => {
            return Err(Error::UnknownScenario {
                name: other.to_string(),
                available: available(),
            })
        }
    })
}

/// A named group of `key = value` entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Section {
    pub name: String,
    pub entries: Vec<(String, String)>,
}

impl Section {
    pub fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            entries: Vec::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.entries.push((key.to_string(), value.to_string()));
        self
    }

    pub fn lookup(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn get(&self, key: &str) -> Result<&str> {
        self.lookup(key)
            .ok_or_else(|| Error::Malformed(format!("[{}] is missing `{key}`", self.name)))
    }

    pub fn num(&self, key: &str) -> Result<f64> {
        let v = self.get(key)?;
        v.trim()
            .parse()
            .map_err(|_| Error::Malformed(format!("[{}] `{key}` = `{v}` is not a number", self.name)))
    }

    pub fn int(&self, key: &str) -> Result<u64> {
        let v = self.get(key)?;
        v.trim()
            .parse()
            .map_err(|_| Error::Malformed(format!("[{}] `{key}` = `{v}` is not an integer", self.name)))
    }

    pub fn nums(&self, key: &str) -> Result<Vec<f64>> {
        let v = self.get(key)?;
        v.split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Malformed(format!("[{}] `{key}` = `{v}` is not a number list", self.name)))
    }

    /// Rejects keys outside `allowed`.
    pub fn only(&self, allowed: &[&str]) -> Result<()> {
        match self.entries.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
            Some((k, _)) => Err(Error::Malformed(format!("unrecognized key `{k}` in [{}]", self.name))),
            None => Ok(()),
        }
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", ")
}

fn coefficient_section(name: &str, f: &CoefficientField) -> Section {
    match f {
        CoefficientField::Constant(c) => Section::new(name).with("kind", "constant").with("value", c),
        CoefficientField::Wave {
            base,
            amplitude,
            time_frequency,
            frequencies,
            phase,
        } => Section::new(name)
            .with("kind", "wave")
            .with("base", base)
            .with("amplitude", amplitude)
            .with("time_frequency", time_frequency)
            .with("frequencies", join(frequencies))
            .with("phase", phase),
    }
}

fn coefficient_from(s: &Section) -> Result<CoefficientField> {
    match s.get("kind")? {
        "constant" => {
            s.only(&["kind", "value"])?;
            Ok(CoefficientField::Constant(s.num("value")?))
        }
        "wave" => {
            s.only(&["kind", "base", "amplitude", "time_frequency", "frequencies", "phase"])?;
            Ok(CoefficientField::Wave {
                base: s.num("base")?,
                amplitude: s.num("amplitude")?,
                time_frequency: s.num("time_frequency")?,
                frequencies: s.nums("frequencies")?,
                phase: s.num("phase")?,
            })
        }
        other => Err(Error::Malformed(format!("[{}] unknown coefficient kind `{other}`", s.name))),
    }
}

impl Scenario {
    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn boundary_data(&self) -> Result<BoundaryData> {
        self.boundary.data(&self.grid, &self.coefficients)
    }

    pub fn partner_data(&self) -> Result<Option<BoundaryData>> {
        self.partner
            .as_ref()
            .map(|p| p.data(&self.grid, &self.coefficients))
            .transpose()
    }

    /// Keeps only the checks whose names are listed.
    pub fn select_checks(&mut self, names: &[String]) -> Result<()> {
        if let Some(bad) = names.iter().find(|n| !Check::NAMES.contains(&n.as_str())) {
            return Err(Error::Malformed(format!(
                "unknown check `{bad}`; known: {}",
                Check::NAMES.join(", ")
            )));
        }
        self.checks.retain(|c| names.iter().any(|n| n == c.name()));
        Ok(())
    }

    /// Serializes the descriptor.
    pub fn to_sections(&self) -> Vec<Section> {
        let g = &self.grid;
        let mut scenario = Section::new("scenario").with("name", &self.name).with(
            "transform",
            match self.transform {
                Transform::None => "none",
                Transform::ReflectOdd => "reflect-odd",
            },
        );
        if let Some(seed) = self.seed {
            scenario = scenario.with("seed", seed);
        }
        let mut out = vec![
            scenario,
            Section::new("grid")
                .with("lower", join(g.lower()))
                .with("upper", join(g.upper()))
                .with("h", g.h())
                .with("t_start", g.t_start())
                .with("t_end", g.t_end())
                .with("dt", g.dt()),
            coefficient_section("lambda_plus", &self.coefficients.plus),
            coefficient_section("lambda_minus", &self.coefficients.minus),
            Section {
                name: "boundary".into(),
                entries: self.boundary.params(),
            },
        ];
        if let Some(p) = &self.partner {
            out.push(Section {
                name: "partner".into(),
                entries: p.params(),
            });
        }
        for c in &self.checks {
            out.push(Section {
                name: format!("check.{}", c.name()),
                entries: c.params(),
            });
        }
        out
    }

    /// Parses a descriptor; unknown sections and keys are errors.
    pub fn from_sections(sections: &[Section]) -> Result<Self> {
        let find = |name: &str| sections.iter().find(|s| s.name == name);
        let need = |name: &str| find(name).ok_or_else(|| Error::Malformed(format!("missing section [{name}]")));
        for s in sections {
            let known = matches!(
                s.name.as_str(),
                "scenario" | "grid" | "lambda_plus" | "lambda_minus" | "boundary" | "partner"
            ) || s.name.starts_with("check.");
            if !known {
                return Err(Error::Malformed(format!("unknown section [{}]", s.name)));
            }
        }
        let sc = need("scenario")?;
        sc.only(&["name", "transform", "seed"])?;
        let transform = match sc.lookup("transform").unwrap_or("none") {
            "none" => Transform::None,
            "reflect-odd" => Transform::ReflectOdd,
            other => return Err(Error::Malformed(format!("unknown transform `{other}`"))),
        };
        let seed = sc.lookup("seed").map(|_| sc.int("seed")).transpose()?;
        let g = need("grid")?;
        g.only(&["lower", "upper", "h", "t_start", "t_end", "dt"])?;
        let grid = GridSpec::new(
            g.nums("lower")?,
            g.nums("upper")?,
            g.num("h")?,
            (g.num("t_start")?, g.num("t_end")?),
            g.num("dt")?,
        )?;
        let coefficients = CoefficientPair::new(
            coefficient_from(need("lambda_plus")?)?,
            coefficient_from(need("lambda_minus")?)?,
        )?;
        let boundary = BoundarySpec::from_params(need("boundary")?)?;
        let partner = find("partner").map(BoundarySpec::from_params).transpose()?;
        let checks = sections
            .iter()
            .filter_map(|s| s.name.strip_prefix("check.").map(|n| (n, s)))
            .map(|(n, s)| Check::from_section(n, s))
            .collect::<Result<Vec<_>>>()?;
        Ok(Scenario {
            name: sc.get("name")?.to_string(),
            grid,
            coefficients,
            boundary,
            partner,
            transform,
            checks,
            seed,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalogue_builds() {
        assert!(list().len() >= 7);
        for (name, _) in list() {
            let s = build(name, &Overrides::default()).unwrap();
            assert_eq!(s.name, name);
            assert!(!s.checks.is_empty());
            s.boundary_data().unwrap();
        }
    }

    #[test]
    fn default_desk_scale() {
        let s = build("branch-generic", &Overrides::default()).unwrap();
        assert_eq!(s.grid.shape(), &[65, 65]);
        assert_eq!(s.grid.slices(), 129);
        let c = build("one-phase-contact", &Overrides::default()).unwrap();
        assert_eq!(c.grid.shape(), &[33, 65]);
    }

    #[test]
    fn unknown_name_lists_catalogue() {
        match build("nope", &Overrides::default()) {
            Err(Error::UnknownScenario { available, .. }) => assert!(available.contains(&"h-exact".to_string())),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn seeds_are_deterministic() {
        let o = Overrides {
            seed: Some(7),
            ..Overrides::default()
        };
        let a = build("branch-generic", &o).unwrap();
        let b = build("branch-generic", &o).unwrap();
        assert_eq!(a, b);
        let (da, db) = (a.boundary_data().unwrap(), b.boundary_data().unwrap());
        for k in 0..a.grid.slices() {
            for s in 0..a.grid.space_len() {
                let x = a.grid.space_coords(s);
                let t = a.grid.time(k);
                assert_eq!(da.eval(t, &x).to_bits(), db.eval(t, &x).to_bits());
            }
        }
        let c = build("branch-generic", &Overrides { seed: Some(8), ..o }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn perturbation_stays_within_amplitude() {
        let s = build("branch-generic", &Overrides::default()).unwrap();
        let waves = s.boundary.perturbation_waves(2);
        assert_eq!(waves.len(), PERTURBATION_MODES);
        let total: f64 = waves.iter().map(|w| w.amplitude).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(s.coefficients.lambda_min() >= 1.0 - BRANCH_WOBBLE - 1e-12);
    }

    #[test]
    fn overrides_change_resolution() {
        let o = Overrides {
            nodes: Some(129),
            dt: Some(1.0 / 256.0),
            seed: None,
        };
        let s = build("h-exact", &o).unwrap();
        assert_eq!(s.grid.shape(), &[129, 129]);
        assert_eq!(s.grid.slices(), 513);
        assert!(matches!(
            build("h-exact", &Overrides { nodes: Some(2), ..o }),
            Err(Error::GridTooSmall(_))
        ));
    }

    #[test]
    fn sections_round_trip() {
        for (name, _) in list() {
            let s = build(name, &Overrides::default()).unwrap();
            let back = Scenario::from_sections(&s.to_sections()).unwrap();
            assert_eq!(back, s, "{name}");
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let s = build("h-exact", &Overrides::default()).unwrap();
        let mut secs = s.to_sections();
        secs[1].entries.push(("spacing".into(), "1".into()));
        assert!(Scenario::from_sections(&secs).is_err());
        let mut secs = s.to_sections();
        secs.push(Section::new("extra"));
        assert!(Scenario::from_sections(&secs).is_err());
    }

    #[test]
    fn reflected_counterexample_runs_quotient_check() {
        let s = build("reflected-counterexample", &Overrides::default()).unwrap();
        assert_eq!(s.transform, Transform::ReflectOdd);
        assert!(s.checks.iter().any(|c| c.name() == "temporal-quotient"));
    }

    #[test]
    fn forward_pair_agrees_on_parabolic_boundary() {
        let s = build("forward-pair", &Overrides::default()).unwrap();
        let a = s.boundary_data().unwrap();
        let b = s.partner_data().unwrap().unwrap();
        let g = &s.grid;
        for k in 0..g.slices() {
            for sp in 0..g.space_len() {
                if k == 0 || g.is_spatial_boundary(sp) {
                    let x = g.space_coords(sp);
                    assert_eq!(a.eval(g.time(k), &x), b.eval(g.time(k), &x));
                }
            }
        }
        let mid = b.eval(0.0, &[0.0, 0.0]) - a.eval(0.0, &[0.0, 0.0]);
        assert!((mid - 0.025).abs() < 1e-12);
    }

    #[test]
    fn check_selection() {
        let mut s = build("branch-generic", &Overrides::default()).unwrap();
        s.select_checks(&["nondegeneracy".into()]).unwrap();
        assert_eq!(s.checks.len(), 1);
        assert!(s.select_checks(&["bogus".into()]).is_err());
    }
}
