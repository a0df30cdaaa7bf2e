use std::fs::File;
use std::io::{BufWriter, Write};

use rand::seq::index;
use rand::Rng;
use rmerton::dynamics::simulate_range;
use rmerton::export::{self, DecisionRow, Meta, Table};
use rmerton::rng::PathRng;
use rmerton::valuation::corner_value_samples;
use rmerton::verify::{
    convergence_order, corner_agreement, linspace, minimax_gap, mixture_linearity_check, moment_probes, StateSampling,
};
use rmerton::{select_corner, value_robust, MarketConstants, ParamSource, ValuePoint, WorstCase};
use serde_json::json;

use crate::{Check, Failure, Setup, Verdict};

/// Paths simulated and written per batch.
const CHUNK: u64 = 1024;

/// Parameters that generate simulated paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Regime {
    Center,
    WorstCase,
}

impl std::str::FromStr for Regime {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "center" => Ok(Regime::Center),
            "worst-case" | "worst_case" => Ok(Regime::WorstCase),
            _ => Err("expected center or worst-case".into()),
        }
    }
}

impl Regime {
    fn label(self) -> &'static str {
        match self {
            Regime::Center => "center",
            Regime::WorstCase => "worst-case",
        }
    }
}

fn source(setup: &Setup) -> Result<(Regime, Box<dyn ParamSource + '_>), Failure> {
    let regime: Regime = setup.kv.get_or("regime", Regime::Center)?;
    let src: Box<dyn ParamSource> = match regime {
        Regime::Center => Box::new(setup.bx.center()),
        Regime::WorstCase => Box::new(WorstCase {
            bx: &setup.bx,
            mode: setup.cfg.mode,
        }),
    };
    Ok((regime, src))
}

fn meta(setup: &Setup, command: &str) -> Meta {
    Meta::new(&setup.fingerprint())
        .with("command", command)
        .with("seed", setup.cfg.seed)
        .with("mode", setup.cfg.mode)
}

fn create(setup: &Setup, name: &str) -> Result<BufWriter<File>, Failure> {
    let path = setup.file(name);
    File::create(&path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

fn initial_point(setup: &Setup) -> ValuePoint {
    let s = &setup.cfg.initial;
    ValuePoint {
        t: 0.0,
        mu: s.mu,
        nu: s.nu,
        x: s.x,
    }
}

pub fn simulate(setup: &Setup) -> Result<(), Failure> {
    let (regime, src) = source(setup)?;
    let trajectories: bool = setup.kv.get_or("export_trajectories", false)?;
    let cfg = &setup.cfg;
    let consts = MarketConstants::from(&setup.bx);
    let meta = meta(setup, "simulate")
        .with("regime", regime.label())
        .with("strategy", cfg.strategy);

    let mut summaries = Table::summaries(create(setup, "paths.csv")?, &meta)?;
    let mut traj = if trajectories {
        Some(Table::trajectories(create(setup, "trajectories.csv")?, &meta)?)
    } else {
        None
    };
    let mut invalid = Vec::new();
    let mut valid = 0usize;
    let n = cfg.n_paths as u64;
    for start in (0..n).step_by(CHUNK as usize) {
        let sim = simulate_range(cfg, &consts, src.as_ref(), &cfg.initial, start..(start + CHUNK).min(n));
        summaries.push_summaries(&sim.paths)?;
        if let Some(t) = traj.as_mut() {
            t.push_trajectories(&sim.paths)?;
        }
        valid += sim.paths.len();
        invalid.extend(sim.invalid);
    }
    summaries.finish()?;
    if let Some(t) = traj {
        t.finish()?;
    }
    let mut w = create(setup, "invalid_paths.csv")?;
    export::write_invalid(&mut w, &meta, &invalid)?;
    w.flush()?;
    println!("simulate: {valid} valid paths, {} invalid", invalid.len());
    Ok(())
}

pub fn policy(setup: &Setup) -> Result<(), Failure> {
    let (regime, src) = source(setup)?;
    let cfg = &setup.cfg;
    let consts = MarketConstants::from(&setup.bx);
    let meta = meta(setup, "policy").with("regime", regime.label());
    let mut table = Table::decisions(create(setup, "decisions.csv")?, &meta)?;
    let n = cfg.n_paths as u64;
    let mut rows_written = 0usize;
    for start in (0..n).step_by(CHUNK as usize) {
        let sim = simulate_range(cfg, &consts, src.as_ref(), &cfg.initial, start..(start + CHUNK).min(n));
        let mut rows: Vec<DecisionRow> = Vec::new();
        for p in &sim.paths {
            for s in p.rebalance_states() {
                let d = select_corner(s.mu, s.nu, &setup.bx, cfg.mode)?;
                rows.push((p.path_index, s.t, s.mu, s.nu, d));
            }
        }
        table.push_decisions(&rows)?;
        rows_written += rows.len();
    }
    table.finish()?;
    println!("policy: {rows_written} decisions");
    Ok(())
}

pub fn value(setup: &Setup, t: Option<f64>, mu: Option<f64>, nu: Option<f64>, x: Option<f64>) -> Result<(), Failure> {
    let init = initial_point(setup);
    let point = ValuePoint {
        t: t.unwrap_or(init.t),
        mu: mu.unwrap_or(init.mu),
        nu: nu.unwrap_or(init.nu),
        x: x.unwrap_or(init.x),
    };
    let (est, decision) = value_robust(&point, &setup.bx, setup.cfg.mode, &setup.cfg)?;
    let c = decision.corner;
    let meta = meta(setup, "value")
        .with("t", point.t)
        .with("mu", point.mu)
        .with("nu", point.nu)
        .with("x", point.x)
        .with("corner", decision.corner_index);
    let mut w = create(setup, "value.csv")?;
    export::write_value(&mut w, &meta, &est)?;
    w.flush()?;
    let report = json!({
        "fingerprint": setup.fingerprint(),
        "point": point,
        "estimate": est,
        "decision": {
            "mode": decision.mode.to_string(),
            "corner_index": decision.corner_index,
            "theta_mu": c.theta_mu,
            "eta_mu": c.eta_mu,
            "theta_sigma": c.theta_sigma,
            "eta_sigma": c.eta_sigma,
            "mu_band": decision.mu_band.label(),
            "mu_side": decision.mu_side.label(),
            "nu_band": decision.nu_band.label(),
        },
    });
    println!("{}", serde_json::to_string_pretty(&report).expect("json"));
    Ok(())
}

pub fn verify(setup: &Setup, check: Check) -> Result<(), Failure> {
    let meta = meta(setup, &format!("verify {check}"));
    let verdict = match check {
        Check::Minimax => minimax(setup, &meta)?,
        Check::Corners => corners(setup, &meta)?,
        Check::Mixture => mixture(setup, &meta)?,
        Check::Moments => moments(setup, &meta)?,
        Check::Convergence => convergence(setup, &meta)?,
    };
    let mut w = create(setup, &format!("verdict_{check}.txt"))?;
    verdict.write(&mut w, &meta)?;
    w.flush()?;
    println!("{check}: {}", verdict.label());
    if verdict.pass {
        Ok(())
    } else {
        Err(Failure::Failed(format!("check {check} failed")))
    }
}

fn minimax(setup: &Setup, meta: &Meta) -> Result<Verdict, Failure> {
    let kv = &setup.kv;
    let grid = linspace(
        kv.get_or("pi_grid_min", -3.0)?,
        kv.get_or("pi_grid_max", 3.0)?,
        kv.get_or("pi_grid_points", 41)?,
    );
    let rep = minimax_gap(&initial_point(setup), &setup.bx, &grid, &setup.cfg)?;
    let mut w = create(setup, "minimax.csv")?;
    export::write_minimax(&mut w, meta, &setup.bx, &rep)?;
    w.flush()?;
    let bound = 3.0 * rep.gap_se;
    let ordered = rep.sup_inf <= rep.inf_sup;
    Ok(Verdict::new("minimax", ordered && rep.gap <= bound)
        .field("sup_inf", rep.sup_inf)
        .field("inf_sup", rep.inf_sup)
        .field("gap", rep.gap)
        .field("gap_se", rep.gap_se)
        .field("tolerance", format!("0 <= gap <= 3 * gap_se = {bound}"))
        .field("sup_inf_le_inf_sup", ordered)
        .field("argmax_pi", rep.pi_grid[rep.argmax_pi])
        .field("argmin_corner", rep.argmin_corner)
        .field("n_paths", setup.cfg.n_paths)
        .field("excluded_paths", rep.excluded_paths))
}

fn corners(setup: &Setup, meta: &Meta) -> Result<Verdict, Failure> {
    let kv = &setup.kv;
    let sampling = StateSampling {
        horizon: kv.get_or("corner_horizon", 0.1)?,
        n_interior: kv.get_or("corner_interior_states", 20)?,
        n_outside: kv.get_or("corner_outside_states", 20)?,
        seed: setup.cfg.seed,
    };
    let rows = corner_agreement(&setup.bx, setup.cfg.mode, &setup.cfg, &sampling)?;
    let (interior, outside): (Vec<_>, Vec<_>) = rows.iter().cloned().partition(|r| r.interior(&setup.bx));
    let diff: Vec<_> = outside
        .iter()
        .filter(|r| r.decision.corner_index != r.brute_argmin)
        .cloned()
        .collect();
    let mut w = create(setup, "corner_checks.csv")?;
    export::write_corner_checks(&mut w, meta, &setup.bx, &rows)?;
    w.flush()?;
    let mut w = create(setup, "corner_diff.csv")?;
    export::write_corner_checks(&mut w, meta, &setup.bx, &diff)?;
    w.flush()?;
    let agree = interior.iter().filter(|r| r.agrees).count();
    Ok(Verdict::new("corners", agree == interior.len())
        .field("interior_states", interior.len())
        .field("interior_agree", agree)
        .field(
            "tolerance",
            "same corner or selected value within 3 combined SE of the minimum",
        )
        .field("outside_states", outside.len())
        .field("outside_disagreements", diff.len())
        .field("horizon", sampling.horizon)
        .field("n_paths", setup.cfg.n_paths))
}

fn mixture(setup: &Setup, meta: &Meta) -> Result<Verdict, Failure> {
    const TOLERANCE: f64 = 1e-12;
    let trials: usize = setup.kv.get_or("mixture_trials", 100)?;
    let samples = corner_value_samples(&initial_point(setup), &setup.bx, &setup.cfg)?;
    let mut rng = PathRng::new(setup.cfg.seed, u64::MAX - 1);
    let mut rows = Vec::with_capacity(trials);
    let mut worst = 0.0f64;
    for trial in 0..trials {
        let picks = index::sample(rng.rng(), samples.len(), 3).into_vec();
        let raw: Vec<f64> = (0..3).map(|_| -(1.0 - rng.rng().random::<f64>()).ln()).collect();
        let total: f64 = raw.iter().sum();
        let mut w: Vec<f64> = raw.iter().map(|v| v / total).collect();
        w[2] = (1.0 - w[0] - w[1]).max(0.0);
        let chosen: Vec<_> = picks.iter().map(|&c| samples[c].clone()).collect();
        let residual = mixture_linearity_check(&chosen, &w)?;
        worst = worst.max(residual);
        let mut row = vec![trial.to_string()];
        row.extend(picks.iter().map(|c| c.to_string()));
        row.extend(w.iter().map(|v| v.to_string()));
        row.push(residual.to_string());
        rows.push(row);
    }
    let mut f = create(setup, "mixture.csv")?;
    export::write_rows(
        &mut f,
        meta,
        &[
            "trial", "corner_a", "corner_b", "corner_c", "w_a", "w_b", "w_c", "residual",
        ],
        rows,
    )?;
    f.flush()?;
    Ok(Verdict::new("mixture", worst <= TOLERANCE)
        .field("trials", trials)
        .field("max_residual", format!("{worst:e}"))
        .field("tolerance", format!("{TOLERANCE:e}"))
        .field("n_paths", setup.cfg.n_paths))
}

fn moments(setup: &Setup, meta: &Meta) -> Result<Verdict, Failure> {
    const TOLERANCE: f64 = 0.05;
    let ns: Vec<u32> = setup.kv.get_list_or("moment_exponents", vec![1, 2, 3, 4])?;
    let sizes: Vec<usize> = setup.kv.get_list_or("moment_sample_sizes", vec![100_000, 400_000])?;
    let probes = moment_probes(&ns, &setup.bx, &setup.cfg, &sizes)?;
    let mut rows = Vec::new();
    let mut verdict_fields = Vec::new();
    let mut pass = true;
    for p in &probes {
        for (k, &size) in p.sample_sizes.iter().enumerate() {
            let change = |v: &[f64]| if k == 0 { String::new() } else { v[k - 1].to_string() };
            rows.push(vec![
                p.n.to_string(),
                size.to_string(),
                p.nu[k].mean.to_string(),
                p.nu[k].std_error.to_string(),
                p.mu[k].mean.to_string(),
                p.mu[k].std_error.to_string(),
                change(&p.nu_rel_change),
                change(&p.mu_rel_change),
            ]);
        }
        let stable = p.max_rel_change() < TOLERANCE;
        let clean = p.n > 2 || p.overflow_excluded == 0;
        pass &= stable && clean;
        verdict_fields.push((format!("n{}_max_rel_change", p.n), p.max_rel_change().to_string()));
        verdict_fields.push((format!("n{}_overflow_excluded", p.n), p.overflow_excluded.to_string()));
    }
    let mut f = create(setup, "moments.csv")?;
    export::write_rows(
        &mut f,
        meta,
        &[
            "n",
            "sample_size",
            "nu_mean",
            "nu_se",
            "mu_mean",
            "mu_se",
            "nu_rel_change",
            "mu_rel_change",
        ],
        rows,
    )?;
    f.flush()?;
    let mut v = Verdict::new("moments", pass)
        .field(
            "tolerance",
            format!("rel_change < {TOLERANCE}; no overflow exclusions for n <= 2"),
        )
        .field("sample_sizes", format!("{sizes:?}"));
    v.fields.extend(verdict_fields);
    Ok(v)
}

fn convergence(setup: &Setup, meta: &Meta) -> Result<Verdict, Failure> {
    const RANGE: (f64, f64) = (0.4, 1.1);
    let exps: Vec<i32> = setup.kv.get_list_or("convergence_dt_exponents", vec![6, 7, 8, 9, 10])?;
    let n_paths: usize = setup.kv.get_or("convergence_paths", 1000)?;
    let cfg = rmerton::SimConfig {
        n_paths,
        ..setup.cfg.clone()
    };
    let (regime, src) = source(setup)?;
    let dts: Vec<f64> = exps.iter().map(|&k| 2f64.powi(-k)).collect();
    let rep = convergence_order(&cfg, &MarketConstants::from(&setup.bx), src.as_ref(), &dts, false)?;
    let mut f = create(setup, "convergence.csv")?;
    export::write_rows(
        &mut f,
        &meta.clone().with("order", rep.order).with("regime", regime.label()),
        &["dt", "rms"],
        rep.dts
            .iter()
            .zip(&rep.rms)
            .map(|(d, e)| vec![d.to_string(), e.to_string()]),
    )?;
    f.flush()?;
    Ok(Verdict::new("convergence", (RANGE.0..=RANGE.1).contains(&rep.order))
        .field("order", rep.order)
        .field("tolerance", format!("order in [{}, {}]", RANGE.0, RANGE.1))
        .field("n_used", rep.n_used)
        .field("excluded_paths", rep.excluded_paths))
}
