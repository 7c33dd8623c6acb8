//! Building spaces from a campaign and running its checks.
//!
//! Every random draw comes from a stream derived from the campaign seed and
//! its position: point `s` of space `i` uses `derive_seed(seed, [i, s])` and
//! check `j` at that point uses `derive_seed(seed, [i, s, j + 1])`. Results
//! are therefore independent of the thread count and scheduling.

use std::sync::Arc;
use std::time::Instant;

use fission_core::additive::{self, ExtendedOrbit, IrregularType};
use fission_core::lie::{CMat, CartanElement, GroupElement};
use fission_core::sample::{self, Rng};
use fission_core::spaces::{self, ConjugacyClass, Double, Fission, FissionSimple, Fusion, Orientation};
use fission_core::verify::{self, CheckReport, Tolerances};
use fission_core::{FactorKind, Point, QhSpace};
use rayon::prelude::*;

use crate::config::{Campaign, CheckKind, ConfigError, OrientationSpec, SpaceSpec};
use crate::report::{Report, ResultEntry, Summary, Timings};
use crate::numbers::{Cx, Sci};

/// Stream index for parameters drawn once per space (not per sample).
const PARAMETER_STREAM: u64 = u64::MAX;
/// Draws allowed before a sampler gives up (factorizations can fail).
const MAX_DRAWS: usize = 20;

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Overrides the campaign seed.
    pub seed: Option<u64>,
    /// Worker threads; `None` uses the rayon default.
    pub threads: Option<usize>,
    pub timings: bool,
}

/// How points of a quasi-Hamiltonian space are drawn.
#[derive(Clone)]
pub enum Sampler {
    Native,
    FixedLambda(CartanElement),
    UnitLevel,
    Fused(Arc<Fusion>, Box<Sampler>, Box<Sampler>),
}

#[derive(Clone)]
pub enum Built {
    Qh { space: Arc<dyn QhSpace>, sampler: Sampler },
    Extended(ExtendedOrbit),
}

enum DrawnPoint {
    Qh(Point),
    Extended(additive::ChartPoint),
}

impl Built {
    pub fn name(&self) -> String {
        match self {
            Built::Qh { space, .. } => space.name(),
            Built::Extended(o) => o.name(),
        }
    }

    fn applies(&self, check: CheckKind) -> bool {
        use CheckKind::*;
        match self {
            Built::Qh { space, sampler } => match check {
                Qh1 | Qh2 | Qh3 | Invariance | Equivariance => true,
                Slice => space.factors().contains(&FactorKind::T),
                Reduction => matches!(sampler, Sampler::UnitLevel),
                Closedness | Moment | Dimension | TSlice => false,
            },
            Built::Extended(_) => matches!(check, Closedness | Moment | Dimension | TSlice),
        }
    }

    fn draw(&self, rng: &mut Rng) -> fission_core::Result<DrawnPoint> {
        match self {
            Built::Qh { space, sampler } => draw_qh(space.as_ref(), sampler, rng).map(DrawnPoint::Qh),
            Built::Extended(o) => Ok(DrawnPoint::Extended(o.sample_point(rng))),
        }
    }
}

fn draw_qh(space: &dyn QhSpace, sampler: &Sampler, rng: &mut Rng) -> fission_core::Result<Point> {
    let mut last = None;
    for _ in 0..MAX_DRAWS {
        let attempt = match sampler {
            Sampler::Native => space.sample_point(rng),
            Sampler::FixedLambda(lambda) => {
                let p = Point::new(vec![sample::group_element(space.n(), rng), lambda.to_matrix()]);
                space.validate(&p).map(|_| p)
            }
            Sampler::UnitLevel => spaces::sample_unit_level(space.n(), rng),
            Sampler::Fused(f, s1, s2) => {
                let p1 = draw_qh(f.first().as_ref(), s1, rng)?;
                let p2 = draw_qh(f.second().as_ref(), s2, rng)?;
                Ok(f.join(&p1, &p2))
            }
        };
        match attempt {
            Ok(p) => return Ok(p),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one draw"))
}

fn matrix(rows: &[Vec<Cx>], n: usize, loc: &str) -> Result<CMat, ConfigError> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(ConfigError::new(loc, format!("expected a {n}x{n} matrix")));
    }
    Ok(CMat::from_fn(n, n, |i, j| rows[i][j].0))
}

fn cartan(entries: &[Cx], n: usize, loc: &str) -> Result<CartanElement, ConfigError> {
    if entries.len() != n {
        return Err(ConfigError::new(loc, format!("expected {n} diagonal entries, found {}", entries.len())));
    }
    Ok(CartanElement(entries.iter().map(|c| c.0).collect()))
}

/// Turn a space spec into a space. `path` locates the spec (for parameter
/// streams) and `loc` names it in errors.
fn build(spec: &SpaceSpec, n: usize, seed: u64, path: &[u64], loc: &str) -> Result<Built, ConfigError> {
    let err = |field: &str, e: fission_core::Error| {
        ConfigError::new(if field.is_empty() { loc.to_string() } else { format!("{loc}.{field}") }, e)
    };
    let param_rng = || {
        let mut p = vec![PARAMETER_STREAM];
        p.extend_from_slice(path);
        sample::rng(sample::derive_seed(seed, &p))
    };
    let qh = |space: Arc<dyn QhSpace>| Built::Qh { space, sampler: Sampler::Native };
    Ok(match spec {
        SpaceSpec::Conjugacy { g0 } => {
            let g = match g0 {
                Some(rows) => matrix(rows, n, &format!("{loc}.g0"))?,
                None => sample::group_element(n, &mut param_rng()),
            };
            qh(Arc::new(ConjugacyClass::new(GroupElement::new(g).map_err(|e| err("g0", e))?)))
        }
        SpaceSpec::Double {} => qh(Arc::new(Double::new(n))),
        SpaceSpec::Fission { k: 1, orientation } => {
            if *orientation == OrientationSpec::Opposite {
                return Err(ConfigError::new(format!("{loc}.orientation"), "k = 1 has no Stokes data to orient"));
            }
            qh(Arc::new(FissionSimple::new(n)))
        }
        SpaceSpec::Fission { k, orientation } => {
            let o = match orientation {
                OrientationSpec::Standard => Orientation::Standard,
                OrientationSpec::Opposite => Orientation::Opposite,
            };
            qh(Arc::new(Fission::with_orientation(n, *k, o).map_err(|e| err("k", e))?))
        }
        SpaceSpec::FissionSimple { lambda } => {
            let space: Arc<dyn QhSpace> = Arc::new(FissionSimple::new(n));
            match lambda {
                None => qh(space),
                Some(entries) => {
                    let lam = cartan(entries, n, &format!("{loc}.lambda"))?;
                    FissionSimple::new(n).point(CMat::identity(n, n), &lam).map_err(|e| err("lambda", e))?;
                    Built::Qh {
                        space,
                        sampler: Sampler::FixedLambda(lam),
                    }
                }
            }
        }
        SpaceSpec::Fusion { parts } => {
            if parts.len() < 2 {
                return Err(ConfigError::new(format!("{loc}.parts"), "a fusion needs at least two parts"));
            }
            let mut built = Vec::new();
            for (j, part) in parts.iter().enumerate() {
                let mut sub = path.to_vec();
                sub.push(j as u64);
                let part_loc = format!("{loc}.parts[{j}]");
                match build(part, n, seed, &sub, &part_loc)? {
                    Built::Qh { sampler: Sampler::UnitLevel, .. } => {
                        return Err(ConfigError::new(part_loc, "a groupoid level set cannot be fused further"))
                    }
                    Built::Qh { space, sampler } => built.push((space, sampler)),
                    Built::Extended(_) => return Err(ConfigError::new(part_loc, "extended orbits are not quasi-Hamiltonian spaces")),
                }
            }
            let mut iter = built.into_iter();
            let (mut space, mut sampler) = iter.next().expect("two parts");
            for (next, next_sampler) in iter {
                let fused = Arc::new(spaces::fuse(space, next, 0, 0).map_err(|e| err("parts", e))?);
                sampler = Sampler::Fused(fused.clone(), Box::new(sampler), Box::new(next_sampler));
                space = fused;
            }
            Built::Qh { space, sampler }
        }
        SpaceSpec::Groupoid {} => Built::Qh {
            space: Arc::new(spaces::groupoid_space(n).map_err(|e| err("", e))?),
            sampler: Sampler::UnitLevel,
        },
        SpaceSpec::Extended { k, a0 } => {
            let a0 = match a0 {
                Some(diags) => {
                    if diags.len() + 1 != *k {
                        return Err(ConfigError::new(format!("{loc}.a0"), format!("expected {} diagonals for k = {k}", k.saturating_sub(1))));
                    }
                    let coeffs = diags
                        .iter()
                        .enumerate()
                        .map(|(j, d)| cartan(d, n, &format!("{loc}.a0[{j}]")).map(|c| c.to_matrix()))
                        .collect::<Result<Vec<_>, _>>()?;
                    IrregularType::new(n, coeffs).map_err(|e| err("a0", e))?
                }
                None => IrregularType::sample(n, *k, &mut param_rng()).map_err(|e| err("k", e))?,
            };
            Built::Extended(ExtendedOrbit::new(a0))
        }
    })
}

/// Validate a campaign and build its spaces.
pub fn build_all(c: &Campaign) -> Result<Vec<Built>, ConfigError> {
    if c.n == 0 {
        return Err(ConfigError::new("n", "group size must be positive"));
    }
    if c.samples == 0 {
        return Err(ConfigError::new("samples", "need at least one sample"));
    }
    if c.checks.is_empty() {
        return Err(ConfigError::new("checks", "no checks requested"));
    }
    if c.spaces.is_empty() {
        return Err(ConfigError::new("spaces", "no spaces configured"));
    }
    let built = c
        .spaces
        .iter()
        .enumerate()
        .map(|(i, s)| build(s, c.n, c.seed, &[i as u64], &format!("spaces[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    for (j, check) in c.checks.iter().enumerate() {
        if !built.iter().any(|b| b.applies(*check)) {
            return Err(ConfigError::new(format!("checks[{j}]"), format!("'{}' applies to none of the configured spaces", check.name())));
        }
    }
    Ok(built)
}

/// One report per factor, folded into a single report called `name`.
fn per_factor(name: &str, space: &dyn QhSpace, tol: f64, reports: Vec<CheckReport>) -> CheckReport {
    let mut out = CheckReport::new(name, space.name(), tol);
    for r in &reports {
        for s in &r.subchecks {
            out.record_with(&format!("{}.{}", r.name, s.name), s.residual, s.tolerance);
        }
        if r.status == verify::Status::Inconclusive {
            out.inconclusive(r.note.clone().unwrap_or_default());
        }
    }
    out
}

fn run_qh_check(space: &dyn QhSpace, p: &Point, check: CheckKind, c: &Campaign, tol: &Tolerances, rng: &mut Rng) -> fission_core::Result<CheckReport> {
    let n = space.n();
    let factors = space.factors();
    Ok(match check {
        CheckKind::Qh1 => verify::check_qh1(space, p, &verify::random_triples(space.dim(), c.triples, rng), tol.qh1)?,
        CheckKind::Qh2 => {
            let mut rs = Vec::new();
            for (f, kind) in factors.iter().enumerate() {
                let x = verify::random_algebra_element(*kind, n, rng);
                let mut r = verify::check_qh2(space, f, p, &x, tol.qh2)?;
                r.name = format!("qh2[{}{}]", kind.name(), f);
                rs.push(r);
            }
            per_factor("qh2", space, tol.qh2, rs)
        }
        CheckKind::Qh3 => verify::check_qh3(space, p, tol)?,
        CheckKind::Invariance | CheckKind::Equivariance => {
            let mut rs = Vec::new();
            for (f, kind) in factors.iter().enumerate() {
                let g = verify::random_group_element(*kind, n, rng);
                rs.push(if check == CheckKind::Invariance {
                    verify::check_invariance(space, f, &g, p, tol.invariance)?
                } else {
                    verify::check_equivariance(space, f, &g, p, tol.equivariance)?
                });
            }
            let t = if check == CheckKind::Invariance { tol.invariance } else { tol.equivariance };
            per_factor(check.name(), space, t, rs)
        }
        CheckKind::Slice => {
            let t = factors.iter().position(|f| *f == FactorKind::T).expect("checked applicability");
            verify::check_slice(space, t, p, tol)?
        }
        CheckKind::Reduction => verify::check_reduction(space, 0, p, tol)?,
        CheckKind::Closedness | CheckKind::Moment | CheckKind::Dimension | CheckKind::TSlice => unreachable!("not a QH check"),
    })
}

fn run_extended_check(
    orbit: &ExtendedOrbit,
    p: &additive::ChartPoint,
    check: CheckKind,
    c: &Campaign,
    rng: &mut Rng,
) -> fission_core::Result<CheckReport> {
    let tol = c.tolerances.additive.0;
    let rel = c.tolerances.rank.0;
    Ok(match check {
        CheckKind::Closedness => additive::check_closedness(orbit, p, &verify::random_triples(orbit.chart_dim(), c.triples, rng), tol)?,
        CheckKind::Moment => additive::moment_checks(orbit, p, rng, tol)?,
        CheckKind::Dimension => additive::check_dimension(orbit, p, rel)?,
        CheckKind::TSlice => additive::check_t_slice(orbit, p, rel)?,
        _ => unreachable!("not an extended-orbit check"),
    })
}

fn failed(check: CheckKind, space: &str, tol: f64, e: &fission_core::Error) -> CheckReport {
    let mut r = CheckReport::new(check.name(), space, tol);
    r.record("error", f64::INFINITY);
    r.note = Some(e.to_string());
    r
}

fn tolerance_of(check: CheckKind, c: &Campaign) -> f64 {
    let t = &c.tolerances;
    match check {
        CheckKind::Qh1 => t.qh1.0,
        CheckKind::Qh2 => t.qh2.0,
        CheckKind::Qh3 => t.qh3.0,
        CheckKind::Invariance => t.invariance.0,
        CheckKind::Equivariance => t.equivariance.0,
        CheckKind::Slice | CheckKind::Reduction => t.reduction.0,
        CheckKind::Closedness | CheckKind::Moment => t.additive.0,
        CheckKind::Dimension | CheckKind::TSlice => t.rank.0,
    }
}

/// All applicable checks at sample `s` of space `i`, in config order.
fn run_sample(built: &Built, i: usize, s: usize, c: &Campaign) -> Vec<Option<CheckReport>> {
    let tol = c.tolerances.core();
    let mut rng = sample::rng(sample::derive_seed(c.seed, &[i as u64, s as u64]));
    let point = built.draw(&mut rng);
    c.checks
        .iter()
        .enumerate()
        .map(|(j, &check)| {
            if !built.applies(check) {
                return None;
            }
            let seed = sample::derive_seed(c.seed, &[i as u64, s as u64, j as u64 + 1]);
            let mut rng = sample::rng(seed);
            let result = match (&point, built) {
                (Err(e), _) => Err(e.clone()),
                (Ok(DrawnPoint::Qh(p)), Built::Qh { space, .. }) => run_qh_check(space.as_ref(), p, check, c, &tol, &mut rng),
                (Ok(DrawnPoint::Extended(p)), Built::Extended(o)) => run_extended_check(o, p, check, c, &mut rng),
                _ => unreachable!("point kind matches space kind"),
            };
            let report = result.unwrap_or_else(|e| failed(check, &built.name(), tolerance_of(check, c), &e));
            Some(report.with_seed(seed))
        })
        .collect()
}

fn execute(c: &Campaign, built: &[Built], timings: bool) -> Report {
    let start = Instant::now();
    let items: Vec<(usize, usize)> = (0..built.len()).flat_map(|i| (0..c.samples).map(move |s| (i, s))).collect();
    let done: Vec<(Vec<Option<CheckReport>>, f64)> = items
        .par_iter()
        .map(|&(i, s)| {
            let t = Instant::now();
            let r = run_sample(&built[i], i, s, c);
            (r, t.elapsed().as_secs_f64())
        })
        .collect();

    let mut results = Vec::new();
    let mut space_seconds = vec![0.0; built.len()];
    for (i, _) in built.iter().enumerate() {
        let rows = &done[i * c.samples..(i + 1) * c.samples];
        space_seconds[i] = rows.iter().map(|r| r.1).sum();
        for j in 0..c.checks.len() {
            let samples: Vec<CheckReport> = rows.iter().filter_map(|r| r.0[j].clone()).collect();
            results.extend(ResultEntry::from_samples(&samples));
        }
    }
    let summary = Summary::of(&results);
    Report {
        campaign: c.clone(),
        results,
        summary,
        timings: timings.then(|| Timings {
            total_seconds: Sci(start.elapsed().as_secs_f64()),
            space_seconds: space_seconds.into_iter().map(Sci).collect(),
        }),
    }
}

/// Run a parsed campaign.
pub fn run(mut campaign: Campaign, opts: &RunOptions) -> Result<Report, ConfigError> {
    if let Some(seed) = opts.seed {
        campaign.seed = seed;
    }
    let built = build_all(&campaign)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = opts.threads.filter(|t| *t > 0) {
        pool = pool.num_threads(t);
    }
    let pool = pool.build().map_err(|e| ConfigError::new("threads", e))?;
    Ok(pool.install(|| execute(&campaign, &built, opts.timings)))
}
