//! CSV exports.
//!
//! Every file starts with `#`-prefixed metadata lines (at least the config
//! fingerprint), followed by a header row and comma-separated records with
//! `.` as decimal separator. Floats use Rust's shortest round-trip format.
//!
//! | file                | columns |
//! |---------------------|---------|
//! | path summary        | `seed,path_index,S_T,mu_T,nu_T,X_T,log_X_T` |
//! | trajectories        | `seed,path_index,t,S,mu,nu,X` |
//! | corner decisions    | `path_index,t,mu,nu,mu_band,mu_side,nu_band,theta_mu,eta_mu,theta_sigma,eta_sigma,mode` |
//! | value estimate      | `mean,std_error,n_paths,excluded_paths,fingerprint` |
//! | minimax matrix      | `pi,corner,theta_mu,eta_mu,theta_sigma,eta_sigma,mean,std_error` |
//! | corner values       | `corner,theta_mu,eta_mu,theta_sigma,eta_sigma,mean,std_error` |
//! | corner comparison   | `t,mu,nu,interior,mu_band,mu_side,nu_band,mode,selected,brute_argmin,selected_value,min_value,combined_se,agrees` |

use std::io::Write;

use crate::dynamics::{InvalidPath, PathBundle};
use crate::params::ParamBox;
use crate::robust::CornerDecision;
use crate::valuation::ValueEstimate;
use crate::verify::{BruteForceReport, CornerCheck, MinimaxReport};

pub type IoResult = std::io::Result<()>;

/// Ordered `# key: value` metadata lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Meta(pub Vec<(String, String)>);

impl Meta {
    pub fn new(fingerprint: &str) -> Meta {
        Meta(vec![("fingerprint".into(), fingerprint.into())])
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Meta {
        self.0.push((key.to_string(), value.to_string()));
        self
    }

    pub fn write(&self, w: &mut impl Write) -> IoResult {
        for (k, v) in &self.0 {
            writeln!(w, "# {k}: {v}")?;
        }
        Ok(())
    }
}

fn f(x: f64) -> String {
    format!("{x}")
}

fn table<W: Write>(mut w: W, meta: &Meta, header: &[&str]) -> std::io::Result<csv::Writer<W>> {
    meta.write(&mut w)?;
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(header)?;
    Ok(out)
}

/// A CSV file written in chunks: metadata and header first, then any number
/// of row batches.
pub struct Table<W: Write> {
    out: csv::Writer<W>,
}

impl<W: Write> Table<W> {
    pub fn summaries(w: W, meta: &Meta) -> std::io::Result<Self> {
        let out = table(
            w,
            meta,
            &["seed", "path_index", "S_T", "mu_T", "nu_T", "X_T", "log_X_T"],
        )?;
        Ok(Table { out })
    }

    pub fn trajectories(w: W, meta: &Meta) -> std::io::Result<Self> {
        let out = table(w, meta, &["seed", "path_index", "t", "S", "mu", "nu", "X"])?;
        Ok(Table { out })
    }

    pub fn decisions(w: W, meta: &Meta) -> std::io::Result<Self> {
        let out = table(
            w,
            meta,
            &[
                "path_index",
                "t",
                "mu",
                "nu",
                "mu_band",
                "mu_side",
                "nu_band",
                "theta_mu",
                "eta_mu",
                "theta_sigma",
                "eta_sigma",
                "mode",
            ],
        )?;
        Ok(Table { out })
    }

    pub fn push_summaries(&mut self, paths: &[PathBundle]) -> IoResult {
        for p in paths {
            let s = p.terminal();
            self.out.write_record([
                p.seed.to_string(),
                p.path_index.to_string(),
                f(s.s),
                f(s.mu),
                f(s.nu),
                f(s.x),
                f(s.x.ln()),
            ])?;
        }
        Ok(())
    }

    pub fn push_trajectories(&mut self, paths: &[PathBundle]) -> IoResult {
        for p in paths {
            for s in &p.states {
                self.out.write_record([
                    p.seed.to_string(),
                    p.path_index.to_string(),
                    f(s.t),
                    f(s.s),
                    f(s.mu),
                    f(s.nu),
                    f(s.x),
                ])?;
            }
        }
        Ok(())
    }

    pub fn push_decisions(&mut self, rows: &[DecisionRow]) -> IoResult {
        for (i, t, mu, nu, d) in rows {
            let c = d.corner;
            self.out.write_record([
                i.to_string(),
                f(*t),
                f(*mu),
                f(*nu),
                d.mu_band.label().to_string(),
                d.mu_side.label().to_string(),
                d.nu_band.label().to_string(),
                f(c.theta_mu),
                f(c.eta_mu),
                f(c.theta_sigma),
                f(c.eta_sigma),
                d.mode.to_string(),
            ])?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> IoResult {
        self.out.flush()
    }
}

/// Free-form table for reports without a dedicated writer.
pub fn write_rows<I>(w: &mut impl Write, meta: &Meta, header: &[&str], rows: I) -> IoResult
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut out = table(w, meta, header)?;
    for row in rows {
        out.write_record(&row)?;
    }
    out.flush()
}

pub fn write_path_summaries(w: &mut impl Write, meta: &Meta, paths: &[PathBundle]) -> IoResult {
    let mut t = Table::summaries(w, meta)?;
    t.push_summaries(paths)?;
    t.finish()
}

pub fn write_trajectories(w: &mut impl Write, meta: &Meta, paths: &[PathBundle]) -> IoResult {
    let mut t = Table::trajectories(w, meta)?;
    t.push_trajectories(paths)?;
    t.finish()
}

pub fn write_invalid(w: &mut impl Write, meta: &Meta, invalid: &[InvalidPath]) -> IoResult {
    let meta = meta.clone().with("invalid_paths", invalid.len());
    let mut out = table(w, &meta, &["path_index", "step", "reason"])?;
    for i in invalid {
        out.write_record([i.path_index.to_string(), i.step.to_string(), i.reason.clone()])?;
    }
    out.flush()
}

/// One decision row: `(path_index, t, mu, nu, decision)`.
pub type DecisionRow = (u64, f64, f64, f64, CornerDecision);

pub fn write_decisions(w: &mut impl Write, meta: &Meta, rows: &[DecisionRow]) -> IoResult {
    let mut t = Table::decisions(w, meta)?;
    t.push_decisions(rows)?;
    t.finish()
}

pub fn write_value(w: &mut impl Write, meta: &Meta, est: &ValueEstimate) -> IoResult {
    let mut out = table(
        w,
        meta,
        &["mean", "std_error", "n_paths", "excluded_paths", "fingerprint"],
    )?;
    out.write_record([
        f(est.mean),
        f(est.std_error),
        est.n_paths.to_string(),
        est.excluded_paths.to_string(),
        est.fingerprint.clone(),
    ])?;
    out.flush()
}

pub fn write_minimax(w: &mut impl Write, meta: &Meta, bx: &ParamBox, rep: &MinimaxReport) -> IoResult {
    let meta = meta
        .clone()
        .with("sup_inf", rep.sup_inf)
        .with("inf_sup", rep.inf_sup)
        .with("gap", rep.gap)
        .with("gap_se", rep.gap_se)
        .with("argmax_pi", rep.pi_grid[rep.argmax_pi])
        .with("argmin_corner", rep.argmin_corner)
        .with("excluded_paths", rep.excluded_paths);
    let mut out = table(
        w,
        &meta,
        &[
            "pi",
            "corner",
            "theta_mu",
            "eta_mu",
            "theta_sigma",
            "eta_sigma",
            "mean",
            "std_error",
        ],
    )?;
    for (pi, row) in rep.pi_grid.iter().zip(&rep.values) {
        for (c, cell) in row.iter().enumerate() {
            let q = bx.corner(c);
            out.write_record([
                f(*pi),
                c.to_string(),
                f(q.theta_mu),
                f(q.eta_mu),
                f(q.theta_sigma),
                f(q.eta_sigma),
                f(cell.mean),
                f(cell.std_error),
            ])?;
        }
    }
    out.flush()
}

pub fn write_corner_values(w: &mut impl Write, meta: &Meta, bx: &ParamBox, rep: &BruteForceReport) -> IoResult {
    let meta = meta
        .clone()
        .with("argmin", rep.argmin)
        .with("non_unique", rep.non_unique);
    let mut out = table(
        w,
        &meta,
        &[
            "corner",
            "theta_mu",
            "eta_mu",
            "theta_sigma",
            "eta_sigma",
            "mean",
            "std_error",
        ],
    )?;
    for (c, e) in rep.estimates.iter().enumerate() {
        let q = bx.corner(c);
        out.write_record([
            c.to_string(),
            f(q.theta_mu),
            f(q.eta_mu),
            f(q.theta_sigma),
            f(q.eta_sigma),
            f(e.mean),
            f(e.std_error),
        ])?;
    }
    out.flush()
}

pub fn write_corner_checks(w: &mut impl Write, meta: &Meta, bx: &ParamBox, rows: &[CornerCheck]) -> IoResult {
    let mut out = table(
        w,
        meta,
        &[
            "t",
            "mu",
            "nu",
            "interior",
            "mu_band",
            "mu_side",
            "nu_band",
            "mode",
            "selected",
            "brute_argmin",
            "selected_value",
            "min_value",
            "combined_se",
            "agrees",
        ],
    )?;
    for row in rows {
        let d = &row.decision;
        out.write_record([
            f(row.t),
            f(row.mu),
            f(row.nu),
            row.interior(bx).to_string(),
            d.mu_band.label().to_string(),
            d.mu_side.label().to_string(),
            d.nu_band.label().to_string(),
            d.mode.to_string(),
            d.corner_index.to_string(),
            row.brute_argmin.to_string(),
            f(row.selected_value),
            f(row.min_value),
            f(row.combined_se),
            row.agrees.to_string(),
        ])?;
    }
    out.flush()
}
