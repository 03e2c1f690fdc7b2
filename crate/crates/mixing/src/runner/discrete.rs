//! Lattice-combinatorial checks: `poincare` and `orbits`.

use anyhow::Result;
use mixing_core::lattice::{norm_sq, LatticeBox};
use mixing_core::mc::path_rng;
use mixing_core::orbits::{
    build_orbits_2d, build_orbits_hd, cover_multiplicity, dirichlet_ratio, poincare_gap, projection_bound_margin,
    OrbitSystem,
};
use rand::Rng;

use super::tag;
use crate::config::RunConfig;
use crate::io::{fmt_point, OutputDir, Table};
use crate::report::{Criterion, RunReport};

/// Relative rounding slack on inequalities between computed sums.
pub const ROUNDING_SLACK: f64 = 1e-12;
const POINCARE_STREAM: u64 = 0;
const DIRICHLET_STREAM: u64 = 1;
/// Largest support radius of the random compact spectra.
const DIRICHLET_MAX_RADIUS: i64 = 8;

/// A nonnegative sequence of length `1..=max_len` with scattered zeros and
/// entries spread over six decades.
fn random_sequence<R: Rng>(rng: &mut R, max_len: usize) -> Vec<f64> {
    let len = rng.random_range(1..=max_len);
    (0..len)
        .map(|_| if rng.random_bool(0.25) { 0.0 } else { rng.random::<f64>() * 10f64.powf(rng.random_range(-3.0..3.0)) })
        .collect()
}

/// A symmetric spectrum supported on `0 < |k|_∞ ≤ r` for a random `r ≤ r_max`.
fn random_spectrum<R: Rng>(rng: &mut R, lattice: &LatticeBox, r_max: i64) -> Vec<f64> {
    let r = rng.random_range(1..=r_max);
    let density = rng.random_range(0.2..=1.0);
    let mut y = vec![0.0; lattice.len()];
    for id in lattice.representatives() {
        if lattice.sup_norm(id) <= r && rng.random_bool(density) {
            let v = rng.random::<f64>() * 10f64.powf(rng.random_range(-2.0..2.0));
            y[id] = v;
            y[lattice.pair(id)] = v;
        }
    }
    if y.iter().all(|v| *v == 0.0) {
        let id = lattice.id_of(&unit(lattice.dim())).expect("unit vector in the box");
        y[id] = 1.0;
        y[lattice.pair(id)] = 1.0;
    }
    y
}

fn unit(d: usize) -> Vec<i64> {
    let mut e = vec![0; d];
    e[0] = 1;
    e
}

pub fn run_poincare(cfg: &RunConfig, out: &OutputDir, rep: &mut RunReport) -> Result<()> {
    let mut hand = Table::new(["sequence", "p", "lhs", "rhs"]);
    let cases: [(&[f64], f64, f64); 2] = [(&[1.0, 0.0, 0.0], 1.0, 8.0), (&[1.0, 1.0, 0.0], 2.0, 32.0)];
    let mut hand_err = 0.0f64;
    for (a, lhs, rhs) in cases {
        let (l, r) = poincare_gap(a, 2.0)?;
        hand_err = hand_err.max((l - lhs).abs()).max((r - rhs).abs());
        let s: Vec<String> = a.iter().map(|x| x.to_string()).collect();
        hand.push(vec![s.join(";").into(), 2.0.into(), l.into(), r.into()]);
    }
    out.write_csv("poincare_hand.csv", &hand)?;
    rep.artifacts.push("poincare_hand.csv".into());
    rep.push(Criterion::at_most(
        "discrete Poincare inequality hand cases",
        hand_err,
        0.0,
        "(1,0,…) gives (1, 8) and (1,1,0,…) gives (2, 32) at p = 2",
    ));

    let mut rng = path_rng(cfg.base_seed, POINCARE_STREAM);
    let mut table = Table::new(["sample", "len", "p", "lhs", "rhs"]);
    let mut worst = vec![0.0f64; cfg.p_list.len()];
    for s in 0..cfg.samples {
        let a = random_sequence(&mut rng, cfg.max_support);
        for (i, &p) in cfg.p_list.iter().enumerate() {
            let (l, r) = poincare_gap(&a, p)?;
            if l > 0.0 {
                worst[i] = worst[i].max(l / r);
            }
            table.push(vec![s.into(), a.len().into(), p.into(), l.into(), r.into()]);
        }
    }
    out.write_csv("poincare.csv", &table)?;
    rep.artifacts.push("poincare.csv".into());
    for (i, &p) in cfg.p_list.iter().enumerate() {
        rep.push(Criterion::at_most(
            format!("discrete Poincare inequality on random sequences ({})", tag("p", p)),
            worst[i],
            1.0 + ROUNDING_SLACK,
            format!("max lhs/rhs over {} sequences", cfg.samples),
        ));
    }

    if cfg.dirichlet_samples > 0 {
        let lattice = cfg.lattice()?;
        let theta = cfg.theta(&lattice)?;
        let r_max = (cfg.n - theta.support_sup_norm() - 1).min(DIRICHLET_MAX_RADIUS);
        anyhow::ensure!(r_max >= 1, "N = {} leaves no room for compact spectra", cfg.n);
        let mut rng = path_rng(cfg.base_seed, DIRICHLET_STREAM);
        let mut table = Table::new(["sample", "support", "sum_yp", "dirichlet", "ratio", "bound"]);
        let (mut worst, mut bound) = (0.0f64, f64::NAN);
        for s in 0..cfg.dirichlet_samples {
            let y = random_spectrum(&mut rng, &lattice, r_max);
            let r = dirichlet_ratio(&lattice, &y, &theta, cfg.dirichlet_p)?;
            worst = worst.max(r.ratio);
            bound = r.bound;
            let support = y.iter().filter(|v| **v > 0.0).count();
            table.push(vec![s.into(), support.into(), r.sum_yp.into(), r.dirichlet.into(), r.ratio.into(), r.bound.into()]);
        }
        out.write_csv("dirichlet.csv", &table)?;
        rep.artifacts.push("dirichlet.csv".into());
        rep.push(Criterion::at_most(
            "Dirichlet form controls the lp mass",
            worst,
            bound * (1.0 + ROUNDING_SLACK),
            format!("max ΣY^p/D(Y) over {} spectra, {}", cfg.dirichlet_samples, tag("p", cfg.dirichlet_p)),
        ));
    }
    Ok(())
}

struct SystemSummary {
    label: String,
    violations: usize,
    certified: usize,
    non_maximal: usize,
    min_ratio: f64,
    special_nonzero_h: usize,
    min_special_ratio: f64,
}

fn summarize(label: String, sys: &OrbitSystem, lattice: &LatticeBox, margin: i64, table: &mut Table) -> SystemSummary {
    let cover = cover_multiplicity(sys, lattice, margin);
    let mut s = SystemSummary {
        label,
        violations: cover.violations.len(),
        certified: cover.certified_points,
        non_maximal: 0,
        min_ratio: f64::INFINITY,
        special_nonzero_h: 0,
        min_special_ratio: f64::INFINITY,
    };
    for o in &sys.orbits {
        let ratio = projection_bound_margin(o);
        let maximal = sys.is_maximal(o);
        s.non_maximal += usize::from(!maximal);
        s.min_ratio = s.min_ratio.min(ratio);
        if o.special && sys.planes[o.plane].lattice_h.is_some() {
            s.special_nonzero_h += 1;
            s.min_special_ratio = s.min_special_ratio.min(ratio);
        }
        table.push(vec![
            s.label.clone().into(),
            o.plane.into(),
            (o.quadrant as usize).into(),
            (o.class as usize).into(),
            o.special.into(),
            fmt_point(&o.start).into(),
            o.len().into(),
            maximal.into(),
            ratio.into(),
        ]);
    }
    s
}

pub fn run_orbits(cfg: &RunConfig, out: &OutputDir, rep: &mut RunReport) -> Result<()> {
    let lattice = cfg.lattice()?;
    let mut table =
        Table::new(["steps", "plane", "quadrant", "class", "special", "start", "len", "maximal", "projection_ratio"]);
    let mut systems = Vec::new();
    if cfg.d == 2 {
        let steps = match &cfg.orbit_steps {
            Some(s) => s.clone(),
            None => {
                let r = (cfg.max_step_norm_sq as f64).sqrt().floor() as i64;
                let mut v = Vec::new();
                for a in -r..=r {
                    for b in -r..=r {
                        let l = vec![a, b];
                        if (1..=cfg.max_step_norm_sq).contains(&norm_sq(&l)) {
                            v.push(l);
                        }
                    }
                }
                v
            }
        };
        for l in steps {
            let sys = build_orbits_2d(&l, &lattice)?;
            systems.push(summarize(fmt_point(&l), &sys, &lattice, cfg.orbit_margin, &mut table));
        }
    } else {
        let pairs = match &cfg.orbit_pairs {
            Some(p) => p.clone(),
            None if cfg.d == 3 => vec![(vec![1, 0, 0], vec![0, 1, 0]), (vec![1, 1, 0], vec![1, -1, 0])],
            None => anyhow::bail!("orbit_pairs must be given for d = {}", cfg.d),
        };
        for (l1, l2) in pairs {
            let sys = build_orbits_hd(&l1, &l2, &lattice)?;
            let label = format!("{}|{}", fmt_point(&l1), fmt_point(&l2));
            systems.push(summarize(label, &sys, &lattice, cfg.orbit_margin, &mut table));
        }
    }
    out.write_csv("orbits.csv", &table)?;
    rep.artifacts.push("orbits.csv".into());

    let cover: Vec<serde_json::Value> = systems
        .iter()
        .map(|s| {
            serde_json::json!({
                "steps": s.label, "violations": s.violations, "certified_points": s.certified,
                "non_maximal": s.non_maximal, "min_projection_ratio": s.min_ratio,
                "special_nonzero_h": s.special_nonzero_h,
            })
        })
        .collect();
    let mut cover_doc = serde_json::Map::new();
    cover_doc.insert("systems".into(), cover.into());
    out.write_json("cover.json", &cover_doc)?;
    rep.artifacts.push("cover.json".into());

    let sum = |f: &dyn Fn(&SystemSummary) -> usize| systems.iter().map(f).sum::<usize>();
    let certified = sum(&|s| s.certified);
    rep.push(Criterion::at_most(
        "certified interior covered exactly twice",
        sum(&|s| s.violations) as f64,
        0.0,
        format!("points with multiplicity other than 2 among {certified} certified points, {} step systems", systems.len()),
    ));
    rep.push(Criterion::at_least(
        "certified interior is nonempty",
        systems.iter().map(|s| s.certified).min().unwrap_or(0) as f64,
        1.0,
        "smallest certified set over the step systems",
    ));
    rep.push(Criterion::at_most(
        "every orbit is maximal in the box",
        sum(&|s| s.non_maximal) as f64,
        0.0,
        "orbits that stop before leaving the box",
    ));
    rep.push(Criterion::at_least(
        "projection lower bound along every orbit",
        systems.iter().map(|s| s.min_ratio).fold(f64::INFINITY, f64::min),
        1.0,
        "min over orbit points of c|Π⊥O(n)|²|l1|²/((n+1)²|Δ|²), c = 4, or 5 on special orbits",
    ));
    if cfg.d > 2 {
        let specials = sum(&|s| s.special_nonzero_h);
        rep.push(Criterion::at_least(
            "special orbits through nonzero h exist",
            specials as f64,
            1.0,
            "special orbits in planes with a nonzero lattice point h",
        ));
        rep.push(Criterion::at_least(
            "projection lower bound along special orbits",
            systems.iter().map(|s| s.min_special_ratio).fold(f64::INFINITY, f64::min),
            1.0,
            "against the denominator 5|l1|²",
        ));
    }
    Ok(())
}
