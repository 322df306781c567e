//! Labeled guiding-state datasets and their JSON file format.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{build_heisenberg, ground_state_with, make_guiding_state, CouplingVector, EigenSolverConfig, Lattice2D};
use crate::error::{domain, Result};
use crate::quantum::{PauliSum, StateVector};
use crate::rng;

pub const DATASET_FORMAT: &str = "gsvqa-dataset/1";

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    /// Position in the seeded sample stream; selects the coupling substream.
    pub index: u64,
    pub couplings: CouplingVector,
    pub guiding: StateVector,
    /// `⟨ψ(x)|O|ψ(x)⟩` on the exact ground state.
    pub label: f64,
    pub ground_energy: f64,
    pub gap: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub lattice: Lattice2D,
    pub observable: PauliSum,
    pub delta: f64,
    pub seed: u64,
    pub samples: Vec<Sample>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn n(&self) -> usize {
        self.lattice.n()
    }

    pub fn labels(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.label).collect()
    }

    /// First `m` samples, keeping the metadata.
    pub fn prefix(&self, m: usize) -> Dataset {
        Dataset { samples: self.samples[..m.min(self.len())].to_vec(), ..self.clone_meta() }
    }

    fn clone_meta(&self) -> Dataset {
        Dataset {
            lattice: self.lattice.clone(),
            observable: self.observable.clone(),
            delta: self.delta,
            seed: self.seed,
            samples: Vec::new(),
        }
    }

    pub fn degenerate_count(&self) -> usize {
        self.samples.iter().filter(|s| s.degenerate).count()
    }
}

/// Draws, solves and labels samples `indices` of the stream keyed by `seed`.
pub fn generate_samples(
    lattice: &Lattice2D,
    obs: &PauliSum,
    indices: std::ops::Range<u64>,
    delta: f64,
    seed: u64,
    solver: &EigenSolverConfig,
) -> Result<Vec<Sample>> {
    if !(0.0..1.0).contains(&delta) {
        return domain(format!("delta must lie in [0, 1), got {delta}"));
    }
    let idx: Vec<u64> = indices.collect();
    idx.par_iter()
        .map(|&i| {
            let couplings = CouplingVector::sample(lattice, &mut rng::sample_stream(seed, i));
            solve_sample(lattice, obs, i, couplings, delta, solver)
        })
        .collect()
}

fn solve_sample(
    lattice: &Lattice2D,
    obs: &PauliSum,
    index: u64,
    couplings: CouplingVector,
    delta: f64,
    solver: &EigenSolverConfig,
) -> Result<Sample> {
    let h = build_heisenberg(lattice, &couplings)?;
    let sol = ground_state_with(&h, lattice.n(), solver)?;
    if sol.degenerate {
        log::warn!("sample {index}: degenerate ground space (gap {:e})", sol.gap);
    }
    let guiding = make_guiding_state(&sol, delta)?;
    let label = obs.expectation(&sol.ground)?;
    Ok(Sample { index, couplings, guiding, label, ground_energy: sol.energy, gap: sol.gap, degenerate: sol.degenerate })
}

/// Train samples take stream indices `0..m_train`, test samples `m_train..m_train+m_test`.
pub fn generate_dataset(
    lattice: &Lattice2D,
    obs: &PauliSum,
    m_train: usize,
    m_test: usize,
    delta: f64,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    generate_dataset_with(lattice, obs, m_train, m_test, delta, seed, &EigenSolverConfig::default())
}

pub fn generate_dataset_with(
    lattice: &Lattice2D,
    obs: &PauliSum,
    m_train: usize,
    m_test: usize,
    delta: f64,
    seed: u64,
    solver: &EigenSolverConfig,
) -> Result<(Dataset, Dataset)> {
    if m_train == 0 || m_test == 0 {
        return domain("dataset needs at least one train and one test sample");
    }
    if let Some(q) = obs.max_qubit() {
        if q >= lattice.n() {
            return domain(format!("observable touches qubit {q} but the lattice has {} sites", lattice.n()));
        }
    }
    let (mt, ms) = (m_train as u64, m_test as u64);
    let mut all = generate_samples(lattice, obs, 0..mt + ms, delta, seed, solver)?;
    let test_samples = all.split_off(m_train);
    let meta = |samples| Dataset { lattice: lattice.clone(), observable: obs.clone(), delta, seed, samples };
    Ok((meta(all), meta(test_samples)))
}

/// On-disk dataset document holding both splits.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetFile {
    pub format: String,
    pub lattice: Lattice2D,
    pub seed: u64,
    pub delta: f64,
    pub observable: PauliSum,
    pub train: Vec<SampleRecord>,
    pub test: Vec<SampleRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleRecord {
    pub index: u64,
    pub couplings: CouplingVector,
    pub label: f64,
    pub ground_energy: f64,
    pub gap: f64,
    pub degenerate: bool,
    /// `(re, im)` pairs; omitted files are regenerated from the couplings.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guiding: Option<Vec<(f64, f64)>>,
}

impl DatasetFile {
    pub fn from_splits(train: &Dataset, test: &Dataset, include_amplitudes: bool) -> Self {
        let record = |s: &Sample| SampleRecord {
            index: s.index,
            couplings: s.couplings.clone(),
            label: s.label,
            ground_energy: s.ground_energy,
            gap: s.gap,
            degenerate: s.degenerate,
            guiding: include_amplitudes.then(|| s.guiding.amplitudes().iter().map(|a| (a.re, a.im)).collect()),
        };
        Self {
            format: DATASET_FORMAT.to_string(),
            lattice: train.lattice.clone(),
            seed: train.seed,
            delta: train.delta,
            observable: train.observable.clone(),
            train: train.samples.iter().map(record).collect(),
            test: test.samples.iter().map(record).collect(),
        }
    }

    /// Rebuilds both splits, re-solving any sample stored without amplitudes.
    pub fn into_splits(self, solver: &EigenSolverConfig) -> Result<(Dataset, Dataset)> {
        if self.format != DATASET_FORMAT {
            return domain(format!("unsupported dataset format '{}'", self.format));
        }
        let restore = |records: Vec<SampleRecord>| -> Result<Vec<Sample>> {
            records
                .into_par_iter()
                .map(|r| match r.guiding {
                    Some(amps) => Ok(Sample {
                        index: r.index,
                        couplings: r.couplings,
                        guiding: StateVector::from_amplitudes(
                            amps.into_iter().map(|(re, im)| Complex64::new(re, im)).collect(),
                        )?,
                        label: r.label,
                        ground_energy: r.ground_energy,
                        gap: r.gap,
                        degenerate: r.degenerate,
                    }),
                    None => solve_sample(&self.lattice, &self.observable, r.index, r.couplings, self.delta, solver),
                })
                .collect()
        };
        let meta = |samples| Dataset {
            lattice: self.lattice.clone(),
            observable: self.observable.clone(),
            delta: self.delta,
            seed: self.seed,
            samples,
        };
        let train = meta(restore(self.train.clone())?);
        let test = meta(restore(self.test.clone())?);
        Ok((train, test))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_sizes_and_determinism() {
        let l = Lattice2D::new(2, 2).unwrap();
        let o = PauliSum::magnetization(4);
        let (a, b) = generate_dataset(&l, &o, 5, 3, 1.0 / 16.0, 11).unwrap();
        assert_eq!((a.len(), b.len()), (5, 3));
        assert_eq!(b.samples[0].index, 5);
        let (a2, b2) = generate_dataset(&l, &o, 5, 3, 1.0 / 16.0, 11).unwrap();
        assert_eq!(a, a2);
        assert_eq!(b, b2);
        for s in &a.samples {
            assert!(s.couplings.values().iter().all(|&x| (0.0..2.0).contains(&x)));
        }
        assert!(generate_dataset(&l, &o, 0, 3, 0.1, 1).is_err());
    }

    #[test]
    fn file_round_trip_without_amplitudes() {
        let l = Lattice2D::new(2, 2).unwrap();
        let o = PauliSum::magnetization(4);
        let (a, b) = generate_dataset(&l, &o, 3, 2, 0.05, 3).unwrap();
        let file = DatasetFile::from_splits(&a, &b, false);
        let text = serde_json::to_string(&file).unwrap();
        assert!(!text.contains("guiding"));
        let back: DatasetFile = serde_json::from_str(&text).unwrap();
        let (a2, b2) = back.into_splits(&EigenSolverConfig::default()).unwrap();
        assert_eq!(a, a2);
        assert_eq!(b, b2);
    }
}
