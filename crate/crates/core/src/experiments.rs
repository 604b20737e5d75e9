//! Experiment drivers behind the command-line harness: reconstruction
//! sweeps, property self-tests and unitarity reports.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{
    avg_gate_fidelity, choi_of_unitary, random_cptp, random_mixed_unitary, random_unitary_channel,
    unitary_depolarizing_mixture, ChoiMatrix, LiouvilleMatrix,
};
use crate::clifford::{clifford_cardinality, enumerate_cliffords, sample_clifford};
use crate::error::{Error, Result};
use crate::linalg::{ginibre, haar_unitary, mix_words, random_hermitian, ComplexMatrix, HermitianMatrix, SeedStream};
use crate::measurement::{simulate_agfs, MeasurementMap, NoiseKind, NoiseSpec};
use crate::moments::{
    agf_variance_identity_check, design_combination, design_expansion_coeffs, frame_potential, moment_empirical,
    second_moment_analytic, unitarity, DesignSet, MomentEnsemble,
};
use crate::pauli::pauli_basis;
use crate::reconstruction::{reconstruct_against, SolverConfig};
use crate::schur_weyl::{
    flip_from_paulis, partitions, perm_operator, twirl_clifford, twirl_monte_carlo, twirl_unitary,
    young_projector_with, CharacterTable, SymmetricGroup, TwirlEnsemble,
};

/// Largest qubit count for sweeps (dense solver cap).
pub const SWEEP_MAX_QUBITS: usize = 3;

pub const RESULT_CSV_HEADER: &str = "n,d,m,eta,trial,seed,eps_rec,objective,iterations,status,wall_time_ms";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub qubits: usize,
    pub m_values: Vec<usize>,
    pub eta_values: Vec<f64>,
    pub trials: usize,
    pub master_seed: u64,
    pub solver: SolverConfig,
    pub output_path: String,
    pub noise_kind: NoiseKind,
    /// Write measured wall times; off keeps the CSV byte-reproducible.
    pub record_timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            qubits: 2,
            m_values: vec![50, 100, 200],
            eta_values: vec![0.0, 0.1],
            trials: 20,
            master_seed: 1,
            solver: SolverConfig::default(),
            output_path: "results.csv".into(),
            noise_kind: NoiseKind::Sphere,
            record_timing: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.qubits == 0 || self.qubits > SWEEP_MAX_QUBITS {
            return Err(Error::SizeCap {
                what: "sweep qubits",
                limit: SWEEP_MAX_QUBITS,
                requested: self.qubits,
            });
        }
        if self.trials == 0 {
            return Err(Error::InvalidInput("trials must be at least one".into()));
        }
        if self.m_values.is_empty() || self.m_values.contains(&0) {
            return Err(Error::InvalidInput("m values must be non-empty and positive".into()));
        }
        if self.eta_values.is_empty() {
            return Err(Error::InvalidInput("eta values must be non-empty".into()));
        }
        for &eta in &self.eta_values {
            NoiseSpec::new(self.noise_kind, eta)?;
        }
        self.solver.validate()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub n: usize,
    pub d: usize,
    pub m: usize,
    pub eta: f64,
    pub trial: usize,
    pub seed: u64,
    pub eps_rec: f64,
    pub objective: f64,
    pub iterations: usize,
    /// Solver status, or `error` when the trial could not run.
    pub status: String,
    pub wall_time_ms: f64,
}

impl ResultRow {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{:e},{:e},{},{},{}",
            self.n,
            self.d,
            self.m,
            self.eta,
            self.trial,
            self.seed,
            self.eps_rec,
            self.objective,
            self.iterations,
            self.status,
            self.wall_time_ms
        )
    }
}

pub fn rows_to_csv(rows: &[ResultRow]) -> String {
    let mut s = String::from(RESULT_CSV_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(s, "{}", r.csv_row());
    }
    s
}

/// Seed of one trial, a hash of `(master, n, m, η index, trial)`.
pub fn trial_seed(master: u64, n: usize, m: usize, eta_index: usize, trial: usize) -> u64 {
    mix_words(&[master, n as u64, m as u64, eta_index as u64, trial as u64])
}

/// One sweep cell: a Haar-random unitary channel, `m` simulated AGFs and a
/// reconstruction.
pub fn run_trial(cfg: &ExperimentConfig, m: usize, eta_index: usize, trial: usize) -> ResultRow {
    let n = cfg.qubits;
    let d = 1usize << n;
    let eta = cfg.eta_values[eta_index];
    let seed = trial_seed(cfg.master_seed, n, m, eta_index, trial);
    let start = Instant::now();
    let outcome = (|| {
        let x = random_unitary_channel(d, &mut SeedStream::new(seed, 0).rng());
        let noise = NoiseSpec::new(cfg.noise_kind, eta)?;
        let record = simulate_agfs(&x, m, noise, SeedStream::new(seed, 1))?;
        reconstruct_against(&record, &cfg.solver, &x)
    })();
    let wall_time_ms = if cfg.record_timing {
        start.elapsed().as_secs_f64() * 1e3
    } else {
        0.0
    };
    let base = ResultRow {
        n,
        d,
        m,
        eta,
        trial,
        seed,
        eps_rec: f64::NAN,
        objective: f64::NAN,
        iterations: 0,
        status: "error".into(),
        wall_time_ms,
    };
    match outcome {
        Ok(r) => ResultRow {
            eps_rec: r.eps_rec.unwrap_or(f64::NAN),
            objective: r.objective,
            iterations: r.iterations,
            status: r.status.as_str().into(),
            ..base
        },
        Err(_) => base,
    }
}

/// All `(m, η, trial)` cells in that order, run in parallel.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let jobs: Vec<(usize, usize, usize)> = cfg
        .m_values
        .iter()
        .flat_map(|&m| (0..cfg.eta_values.len()).flat_map(move |e| (0..cfg.trials).map(move |t| (m, e, t))))
        .collect();
    Ok(jobs.par_iter().map(|&(m, e, t)| run_trial(cfg, m, e, t)).collect())
}

/// Runs the sweep and writes the CSV to `cfg.output_path`.
pub fn cmd_simulate(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let rows = run_sweep(cfg)?;
    std::fs::write(&cfg.output_path, rows_to_csv(&rows))?;
    Ok(rows)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelftestLevel {
    Fast,
    Full,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub module: String,
    pub property: String,
    pub passed: bool,
    pub observed: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub message: Option<String>,
}

impl CheckOutcome {
    pub fn line(&self) -> String {
        let mut s = format!(
            "{} {}/{}: observed {:e}, expected {:e}, tolerance {:e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.module,
            self.property,
            self.observed,
            self.expected,
            self.tolerance
        );
        if let Some(m) = &self.message {
            let _ = write!(s, " ({m})");
        }
        s
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SelftestReport {
    pub checks: Vec<CheckOutcome>,
}

impl SelftestReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let _ = writeln!(s, "{}", c.line());
        }
        let failed = self.failures().count();
        let _ = writeln!(s, "{} checks, {} failed", self.checks.len(), failed);
        s
    }

    /// Records `|observed − expected| ≤ tolerance` from a fallible probe
    /// returning `(observed, expected, tolerance)`.
    fn check(&mut self, module: &str, property: &str, probe: impl FnOnce() -> Result<(f64, f64, f64)>) {
        let outcome = match probe() {
            Ok((observed, expected, tolerance)) => CheckOutcome {
                module: module.into(),
                property: property.into(),
                passed: (observed - expected).abs() <= tolerance,
                observed,
                expected,
                tolerance,
                message: None,
            },
            Err(e) => CheckOutcome {
                module: module.into(),
                property: property.into(),
                passed: false,
                observed: f64::NAN,
                expected: f64::NAN,
                tolerance: f64::NAN,
                message: Some(e.to_string()),
            },
        };
        self.checks.push(outcome);
    }
}

const Z_LIMIT: f64 = 5.0;

fn young_suite(report: &mut SelftestReport, table: &CharacterTable, d: usize) {
    let k = table.k;
    let label = format!("d{d}-k{k}");
    let projectors = partitions(k, d)
        .iter()
        .map(|l| young_projector_with(table, l, d).map(|p| p.projector))
        .collect::<Result<Vec<_>>>();
    let projectors = match projectors {
        Ok(p) => p,
        Err(e) => {
            report.check("schur-weyl", &format!("young-projectors-{label}"), || Err(e));
            return;
        }
    };
    let dim = projectors[0].dim();
    report.check("schur-weyl", &format!("young-completeness-{label}"), || {
        let mut sum = HermitianMatrix::zeros(dim);
        for p in &projectors {
            sum.add_scaled(1.0, p);
        }
        Ok(((&sum - &HermitianMatrix::identity(dim)).frobenius_norm(), 0.0, 1e-10))
    });
    report.check("schur-weyl", &format!("young-orthogonality-{label}"), || {
        let mut worst = 0.0f64;
        for (i, p) in projectors.iter().enumerate() {
            for (j, q) in projectors.iter().enumerate() {
                let pq = p.as_matrix().matmul(q.as_matrix());
                let target = if i == j { p.as_matrix().clone() } else { ComplexMatrix::zeros(dim, dim) };
                worst = worst.max((&pq - &target).frobenius_norm());
            }
        }
        Ok((worst, 0.0, 1e-10))
    });
    report.check("schur-weyl", &format!("character-degree-sum-k{k}"), || {
        let identity_class = table
            .classes
            .iter()
            .position(|c| c.parts().iter().all(|&x| x == 1))
            .ok_or_else(|| Error::InvalidInput("character table lacks the identity class".into()))?;
        let sum: i64 = table.values.iter().map(|row| row[identity_class].pow(2)).sum();
        let fact: usize = (1..=k).product();
        Ok((sum as f64, fact as f64, 0.0))
    });
}

fn twirl_oracle(report: &mut SelftestReport, n_or_d: usize, k: usize, ensemble: TwirlEnsemble, samples: usize, seed: u64) {
    let (d, name) = match ensemble {
        TwirlEnsemble::Haar => (n_or_d, format!("unitary-twirl-vs-sampling-d{n_or_d}-k{k}")),
        TwirlEnsemble::Clifford => (1usize << n_or_d, format!("clifford-twirl-vs-sampling-n{n_or_d}")),
    };
    report.check("schur-weyl", &name, || {
        let dim = d.pow(k as u32);
        let a = ginibre(dim, dim, &mut SeedStream::new(seed, 0).rng());
        let a = a.scale_real(dim as f64 / a.frobenius_norm());
        let exact = match ensemble {
            TwirlEnsemble::Haar => twirl_unitary(&a, d, k)?,
            TwirlEnsemble::Clifford => twirl_clifford(&a, n_or_d)?,
        };
        let est = twirl_monte_carlo(&a, d, k, ensemble, samples, SeedStream::new(seed, 1))?;
        Ok((est.max_z_score(&exact, 1e-12), 0.0, Z_LIMIT))
    });
}

/// Property self-test with the built-in character tables.
pub fn cmd_selftest(level: SelftestLevel) -> Result<SelftestReport> {
    cmd_selftest_with_table(level, &CharacterTable::standard(4)?)
}

/// Property self-test using `table` for the degree-4 Young projectors.
pub fn cmd_selftest_with_table(level: SelftestLevel, table: &CharacterTable) -> Result<SelftestReport> {
    let mut r = SelftestReport::default();
    let mut rng = SeedStream::new(0x5e1f, 0).rng();

    r.check("pauli-clifford", "cardinality-n1", || {
        let listed = enumerate_cliffords(1)?.len();
        let formula: f64 = clifford_cardinality(1).to_string().parse().unwrap_or(f64::NAN);
        Ok((listed as f64, formula, 0.0))
    });
    r.check("pauli-clifford", "cardinality-n2", || {
        Ok((clifford_cardinality(2).to_string().parse().unwrap_or(f64::NAN), 11_520.0, 0.0))
    });
    r.check("pauli-clifford", "cardinality-n3", || {
        Ok((clifford_cardinality(3).to_string().parse().unwrap_or(f64::NAN), 92_897_280.0, 0.0))
    });
    r.check("pauli-clifford", "tableau-conjugation-n1", || {
        let mut worst = 0.0f64;
        for t in enumerate_cliffords(1)? {
            let u = t.to_unitary()?;
            for p in pauli_basis(1) {
                let dense = u.matmul(&p.dense()?).matmul(&u.adjoint());
                let image = t.conjugate_pauli(&p).dense()?;
                worst = worst.max((&dense - &image).max_abs());
            }
        }
        Ok((worst, 0.0, 1e-12))
    });

    r.check("channel-algebra", "liouville-round-trip", || {
        let x = random_cptp(2, 2, &mut rng);
        let back = LiouvilleMatrix::from_choi(&x)?.to_choi()?;
        Ok(((x.matrix() - back.matrix()).frobenius_norm(), 0.0, 1e-12))
    });
    let mut rng = SeedStream::new(0x5e1f, 1).rng();
    r.check("channel-algebra", "agf-of-own-unitary", || {
        let u = haar_unitary(2, &mut rng);
        Ok((avg_gate_fidelity(&u, &choi_of_unitary(&u)?)?, 1.0, 1e-12))
    });
    r.check("channel-algebra", "agf-of-depolarizing", || {
        let u = haar_unitary(4, &mut rng);
        Ok((avg_gate_fidelity(&u, &ChoiMatrix::depolarizing(4))?, 0.25, 1e-12))
    });

    young_suite(&mut r, &CharacterTable::standard(3)?, 2);
    young_suite(&mut r, table, 2);
    r.check("schur-weyl", "flip-from-paulis-n1", || {
        let swap = perm_operator(&crate::schur_weyl::Permutation::transposition(2, 0, 1), 2)?;
        Ok(((flip_from_paulis(1)?.as_matrix() - &swap).max_abs(), 0.0, 1e-12))
    });
    r.check("schur-weyl", "clifford-commutant-fixed-n1", || {
        let mut worst = 0.0f64;
        for s in SymmetricGroup::new(4).elements() {
            let p = perm_operator(s, 2)?;
            worst = worst.max((&twirl_clifford(&p, 1)? - &p).max_abs());
        }
        Ok((worst, 0.0, 1e-9))
    });

    let design = DesignSet::full_clifford(1)?;
    r.check("moments-designs", "frame-potential-t2-n1", || Ok((frame_potential(&design, 2)?, 2.0, 1e-10)));
    r.check("moments-designs", "frame-potential-t3-n1", || Ok((frame_potential(&design, 3)?, 5.0, 1e-10)));
    let mut rng = SeedStream::new(0x5e1f, 2).rng();
    r.check("moments-designs", "second-moment-design-average-n1", || {
        let t = crate::channel::random_hermiticity_preserving(2, &mut rng);
        let rep = moment_empirical(&t, MomentEnsemble::Design(&design), 2, 0, SeedStream::new(0, 0))?;
        Ok((rep.empirical, second_moment_analytic(&t), 1e-10))
    });
    r.check("moments-designs", "design-expansion-n1", || {
        let x = random_mixed_unitary(2, 3, &mut rng);
        let c = design_expansion_coeffs(&x, &design)?;
        let back = design_combination(&design, &c)?;
        Ok(((back.matrix() - x.matrix()).frobenius_norm(), 0.0, 1e-9))
    });
    r.check("moments-designs", "unitarity-variance-identity-n1", || {
        let x = crate::channel::random_hermiticity_preserving(2, &mut rng);
        let (lhs, rhs) = agf_variance_identity_check(&x, &design)?;
        Ok((lhs, rhs, 1e-10))
    });

    r.check("measurement-sim", "adjoint-identity", || {
        let settings: Vec<_> = (0..8).map(|_| sample_clifford(1, &mut rng)).collect::<Result<_>>()?;
        let a = MeasurementMap::from_settings(&settings)?;
        let z = random_hermitian(4, &mut rng);
        let y: Vec<f64> = (0..8).map(|i| (i as f64 - 3.5) / 4.0).collect();
        let lhs: f64 = a.apply(&z)?.iter().zip(&y).map(|(p, q)| p * q).sum();
        Ok((lhs, z.inner(&a.adjoint(&y)?), 1e-10))
    });
    r.check("reconstruction", "noiseless-recovery-n1", || {
        let x = random_unitary_channel(2, &mut rng);
        let rec = simulate_agfs(&x, 20, NoiseSpec::none(), SeedStream::new(0x5e1f, 3))?;
        let out = reconstruct_against(&rec, &SolverConfig::default(), &x)?;
        Ok((out.eps_rec.unwrap_or(f64::NAN), 0.0, 1e-6))
    });

    if level == SelftestLevel::Full {
        young_suite(&mut r, table, 4);
        twirl_oracle(&mut r, 2, 3, TwirlEnsemble::Haar, 20_000, 11);
        twirl_oracle(&mut r, 1, 4, TwirlEnsemble::Clifford, 20_000, 12);
        twirl_oracle(&mut r, 2, 4, TwirlEnsemble::Clifford, 20_000, 13);
        let design2 = DesignSet::full_clifford(2)?;
        r.check("moments-designs", "design-expansion-n2", || {
            let x = random_mixed_unitary(4, 2, &mut rng);
            let c = design_expansion_coeffs(&x, &design2)?;
            let back = design_combination(&design2, &c)?;
            Ok(((back.matrix() - x.matrix()).frobenius_norm(), 0.0, 1e-9))
        });
        r.check("moments-designs", "second-moment-vs-sampling-d4", || {
            let t = random_unitary_channel(4, &mut rng);
            let rep = moment_empirical(&t, MomentEnsemble::Haar, 2, 20_000, SeedStream::new(0x5e1f, 4))?;
            Ok(((rep.empirical - second_moment_analytic(&t)) / rep.std_error, 0.0, Z_LIMIT))
        });
    }
    Ok(r)
}

/// Gate set used for the unitarity report.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DesignChoice {
    FullN1,
    FullN2,
    /// `count` uniformly sampled Cliffords on `qubits` qubits.
    Sampled { qubits: usize, count: usize },
}

impl DesignChoice {
    pub fn parse(s: &str, qubits: usize, count: usize) -> Result<Self> {
        match s {
            "full-n1" => Ok(DesignChoice::FullN1),
            "full-n2" => Ok(DesignChoice::FullN2),
            "sampled" => Ok(DesignChoice::Sampled { qubits, count }),
            other => Err(Error::Parse(format!("unknown design '{other}'"))),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            DesignChoice::FullN1 => 2,
            DesignChoice::FullN2 => 4,
            DesignChoice::Sampled { qubits, .. } => 1 << qubits,
        }
    }

    pub fn build(&self, stream: SeedStream) -> Result<DesignSet> {
        match *self {
            DesignChoice::FullN1 => DesignSet::full_clifford(1),
            DesignChoice::FullN2 => DesignSet::full_clifford(2),
            DesignChoice::Sampled { qubits, count } => DesignSet::sampled_clifford(qubits, count, &mut stream.rng()),
        }
    }
}

/// Built-in channel families, or a Choi CSV file.
pub fn load_channel(source: &str, d: usize, stream: SeedStream) -> Result<ChoiMatrix> {
    let mut rng = stream.rng();
    match source {
        "depolarizing" => Ok(ChoiMatrix::depolarizing(d)),
        "identity" => Ok(ChoiMatrix::identity_channel(d)),
        "random-unitary" => Ok(random_unitary_channel(d, &mut rng)),
        _ => {
            if let Some(p) = source.strip_prefix("mixture:") {
                let p: f64 = p.parse().map_err(|_| Error::Parse(format!("bad mixture weight in '{source}'")))?;
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::InvalidInput(format!("mixture weight {p} outside [0, 1]")));
                }
                return unitary_depolarizing_mixture(&haar_unitary(d, &mut rng), p);
            }
            let x = ChoiMatrix::from_csv_str(&std::fs::read_to_string(source)?)?;
            if x.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: x.dim(),
                });
            }
            Ok(x)
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UnitarityReport {
    pub design: String,
    pub design_size: usize,
    pub d: usize,
    pub unitarity: f64,
    /// `Var[F_avg] · d²(d+1)²` over the design.
    pub scaled_variance: f64,
    pub difference: f64,
    pub frame_potential: f64,
    /// Whether the design passes the `P = 2` test within `1e-8`.
    pub two_design: bool,
}

impl UnitarityReport {
    pub fn render(&self) -> String {
        let mut s = format!(
            "design {} ({} elements, d = {})\nunitarity u(X)            {:.12}\nscaled AGF variance       {:.12}\ndifference                {:.3e}\nframe potential (t = 2)   {:.12}\n",
            self.design, self.design_size, self.d, self.unitarity, self.scaled_variance, self.difference, self.frame_potential
        );
        if !self.two_design {
            s.push_str("warning: the gate set is not a unitary 2-design (frame potential above 2); the identity only holds on average\n");
        }
        s
    }
}

pub fn cmd_unitarity(x: &ChoiMatrix, design: &DesignSet) -> Result<UnitarityReport> {
    let (var, _) = agf_variance_identity_check(x, design)?;
    let d = x.dim() as f64;
    let u = unitarity(x);
    let scaled = var * d * d * (d + 1.0).powi(2);
    let fp = frame_potential(design, 2)?;
    Ok(UnitarityReport {
        design: design.label().as_str().into(),
        design_size: design.len(),
        d: x.dim(),
        unitarity: u,
        scaled_variance: scaled,
        difference: scaled - u,
        frame_potential: fp,
        two_design: (fp - 2.0).abs() <= 1e-8,
    })
}
