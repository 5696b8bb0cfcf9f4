use crate::config::{Command, RankModel, RunConfig};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;
use subdom_core::stats::{
    cosine_rank_approx, linear_schedule, rank_report, trial_rng, PathGenerator, RandomPaths,
};
use subdom_core::{
    basis_kernel_plot, diversity_vs_l, f_kout, f_tau, f_tau_sinc_limit, in_domain_bin_cos,
    kernel_plot, multiuser_path_matrix, multiuser_transmit, omega_sweep, path_matrix, rank_study,
    sample_input, subcarrier_domain, subcarrier_encode, transmit, CVector, MultiuserConfig,
    Result, SweepSpec, Transmittance,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Bool(bool),
    Text(String),
}

impl Cell {
    /// CSV text; floats use the shortest representation that round-trips.
    pub fn render(&self) -> String {
        match self {
            Cell::Float(x) => x.to_string(),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as u64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }
}

/// Result of a command: always a table, plus a structured body that
/// replaces the table in JSON output when present.
#[derive(Debug, Clone, PartialEq)]
pub struct Product {
    pub table: Table,
    pub record: Option<serde_json::Value>,
}

impl From<Table> for Product {
    fn from(table: Table) -> Self {
        Self { table, record: None }
    }
}

pub fn execute(cfg: &RunConfig) -> Result<Product> {
    match cfg.command {
        Command::Fig1 => fig1(cfg).map(Into::into),
        Command::Fig2 => fig2(cfg).map(Into::into),
        Command::Fig3 => fig3(cfg).map(Into::into),
        Command::Fig4 => fig4(cfg).map(Into::into),
        Command::Fig5 => fig5(cfg).map(Into::into),
        Command::Sweep => sweep(cfg).map(Into::into),
        Command::Simulate => simulate(cfg),
        Command::Rank => rank(cfg).map(Into::into),
        Command::Diversity => diversity(cfg).map(Into::into),
    }
}

fn fig1(cfg: &RunConfig) -> Result<Table> {
    let mut t = Table::new(&["tau", "abs_f", "abs_sinc"]);
    let n = cfg.grid as i64;
    for j in 0..=n {
        let tau = 2.0 * (2 * j - n) as f64 / n as f64;
        t.push(vec![
            tau.into(),
            f_tau(tau, cfg.l).norm().into(),
            f_tau_sinc_limit(tau, cfg.l).norm().into(),
        ]);
    }
    Ok(t)
}

fn fig2(cfg: &RunConfig) -> Result<Table> {
    let mut t = Table::new(&["cos_theta", "abs_f"]);
    for p in kernel_plot(cfg.theta_star, cfg.l, cfg.grid)? {
        t.push(vec![p.cos_theta.into(), p.abs_f.into()]);
    }
    Ok(t)
}

fn fig3(cfg: &RunConfig) -> Result<Table> {
    let mut t = Table::new(&["cos_theta", "k", "abs_f", "in_bin"]);
    for k in 0..cfg.l {
        for p in basis_kernel_plot(k, cfg.l, cfg.grid)? {
            t.push(vec![
                p.cos_theta.into(),
                k.into(),
                p.abs_f.into(),
                in_domain_bin_cos(p.cos_theta, k, cfg.l).into(),
            ]);
        }
    }
    Ok(t)
}

fn sweep_spec(cfg: &RunConfig, schedule: Vec<f64>) -> SweepSpec {
    SweepSpec {
        dispersion: cfg.dispersion,
        epsilon: cfg.epsilon(),
        ..SweepSpec::on_grid(cfg.l, cfg.c_index, schedule, cfg.trials, cfg.seed)
    }
}

fn fig4(cfg: &RunConfig) -> Result<Table> {
    let table = omega_sweep(&sweep_spec(cfg, vec![0.0, PI]))?;
    let mut t = Table::new(&["omega", "k", "mean_magnitude", "average_a"]);
    for (idx, omega) in table.omegas.iter().enumerate() {
        let average = table.average(idx);
        for (k, mean) in table.k_values.iter().zip(&table.means[idx]) {
            t.push(vec![(*omega).into(), (*k).into(), (*mean).into(), average.into()]);
        }
    }
    Ok(t)
}

fn sweep(cfg: &RunConfig) -> Result<Table> {
    let table = omega_sweep(&sweep_spec(cfg, linear_schedule(PI, cfg.omega_steps)))?;
    let mut t = Table::new(&["omega", "k", "mean_magnitude"]);
    for row in table.rows() {
        t.push(vec![row.omega.into(), row.k.into(), row.mean_magnitude.into()]);
    }
    Ok(t)
}

fn fig5(cfg: &RunConfig) -> Result<Table> {
    let center = cfg.theta_star.cos();
    let mut t = Table::new(&["cos_theta", "abs_f_kout"]);
    for c in subdom_core::cosine_grid(cfg.grid)? {
        t.push(vec![c.into(), f_kout(c - center, cfg.l, cfg.k_out).norm().into()]);
    }
    Ok(t)
}

fn push_vector(t: &mut Table, name: &'static str, v: &CVector) {
    for (i, z) in v.iter().enumerate() {
        t.push(vec![Cell::Text(name.into()), i.into(), z.re.into(), z.im.into()]);
    }
}

fn simulate(cfg: &RunConfig) -> Result<Product> {
    let mut t = Table::new(&["vector", "index", "re", "im"]);
    let mu = MultiuserConfig {
        k_in: cfg.k_in,
        k_out: cfg.k_out,
        l: cfg.l,
        sigma_sq: cfg.sigma_sq,
        sigma_n_sq: cfg.sigma_n_sq,
        seed: cfg.seed,
    };
    if cfg.k_in == cfg.l && cfg.k_out == cfg.l {
        let z = sample_input(cfg.l, cfg.sigma_sq, cfg.seed)?;
        let d = subcarrier_encode(&z)?;
        let flat = Transmittance::random_flat(cfg.l, cfg.seed.wrapping_add(2))?;
        let rec = transmit(&d, &flat, mu.noise_seed(), cfg.sigma_n_sq)?;
        push_vector(&mut t, "input", &rec.input);
        push_vector(&mut t, "subcarriers", &rec.subcarriers);
        push_vector(&mut t, "fourier_transmittance", &rec.fourier_transmittance);
        push_vector(&mut t, "noise", &rec.noise);
        push_vector(&mut t, "output", &rec.output);
        push_vector(&mut t, "domain_output", &rec.domain_output);
        let record = serde_json::to_value(&rec).expect("record serializes");
        return Ok(Product {
            table: t,
            record: Some(record),
        });
    }
    let z = mu.sample_input()?;
    let mut rng = trial_rng(cfg.seed.wrapping_add(2), 0);
    let paths = RandomPaths {
        count: cfg.paths,
        ..RandomPaths::default()
    }
    .generate(cfg.l, &mut rng)?;
    let channel = multiuser_path_matrix(&paths, &mu)?;
    let rec = multiuser_transmit(&z, &channel, &mu)?;
    push_vector(&mut t, "input", &rec.input);
    push_vector(&mut t, "subcarriers", &rec.subcarriers);
    push_vector(&mut t, "noise", &rec.noise);
    push_vector(&mut t, "output", &rec.output);
    let record = serde_json::to_value(&rec).expect("record serializes");
    Ok(Product {
        table: t,
        record: Some(record),
    })
}

fn rank(cfg: &RunConfig) -> Result<Table> {
    let eps = cfg.epsilon();
    match cfg.rank_model {
        RankModel::Gaussian => {
            let mut t = Table::new(&["trial", "rank", "diversity"]);
            for r in rank_study(cfg.l, cfg.sigma_sq, cfg.trials, cfg.seed, eps)? {
                t.push(vec![r.trial.into(), r.rank.into(), r.diversity.into()]);
            }
            Ok(t)
        }
        RankModel::Paths => {
            let generator = RandomPaths {
                count: cfg.paths,
                ..RandomPaths::default()
            };
            let rows: Vec<Vec<Cell>> = (0..cfg.trials)
                .into_par_iter()
                .map(|trial| {
                    let paths = generator.generate(cfg.l, &mut trial_rng(cfg.seed, trial))?;
                    let r = subcarrier_domain(&path_matrix(&paths, cfg.l)?, cfg.l)?;
                    let report = rank_report(r.entries(), eps);
                    Ok(vec![
                        trial.into(),
                        report.rank.into(),
                        report.diversity.into(),
                        cosine_rank_approx(&paths).into(),
                    ])
                })
                .collect::<Result<_>>()?;
            let mut t = Table::new(&["trial", "rank", "diversity", "cos_rank_approx"]);
            t.rows = rows;
            Ok(t)
        }
    }
}

fn diversity(cfg: &RunConfig) -> Result<Table> {
    let generator = RandomPaths {
        count: cfg.paths,
        ..RandomPaths::default()
    };
    let mut t = Table::new(&["l", "mean_diversity"]);
    for row in diversity_vs_l(&cfg.l_list, &generator, cfg.trials, cfg.seed, cfg.epsilon())? {
        t.push(vec![row.l.into(), row.mean_diversity.into()]);
    }
    Ok(t)
}
