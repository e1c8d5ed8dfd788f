//! Per-resample statistic evaluation for the permutation engine.
//!
//! A permutation test recomputes one statistic across tens of thousands of
//! reorderings of the second margin. Each built-in statistic admits a
//! pairing-independent precomputation (sign matrices, bivariate rank
//! counts, centered distance matrices) after which a resample costs far
//! less than evaluating from scratch:
//!
//! * pearson — O(n) dot product of centered margins,
//! * kendall — O(n²) sign-matrix lookups,
//! * hoeffding_delta — O(n²) joint-rank counting,
//! * kappa — O(n²) centered-distance products,
//! * tau_star — O(n³/64) bitset rebuild (the margins must be re-paired).
//!
//! Every evaluator is checked against its from-scratch statistic on
//! permuted margins in the unit tests below.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::stats::taustar::tau_star_value;
use crate::stats::vstat::{sign, v_statistic_bruteforce_with_budget, DEFAULT_TUPLE_BUDGET};
use crate::stats::{kappa, StatisticKind};

/// A shared degree-`r` V-statistic kernel: maps one margin's `r`-tuple to
/// its kernel value.
pub type TupleKernel = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A user-supplied degree-`r` kernel pair for V-statistic testing. Custom
/// statistics are evaluated only through brute-force enumeration, so they
/// are practical for small samples and modest resample counts.
#[derive(Clone)]
pub struct CustomStatistic {
    pub name: String,
    pub degree: usize,
    pub s_kernel: TupleKernel,
    pub t_kernel: TupleKernel,
}

pub(crate) enum Evaluator {
    Pearson {
        cu: Vec<f64>,
        cv: Vec<f64>,
        norm: f64,
    },
    Kendall {
        n: usize,
        su: Vec<i8>,
        sv: Vec<i8>,
    },
    Hoeffding {
        n: usize,
        u_le: Vec<u8>,
        v_le: Vec<u8>,
        r: Vec<u64>,
        s: Vec<u64>,
    },
    Kappa {
        n: usize,
        atil: Vec<f64>,
        btil: Vec<f64>,
    },
    TauStar {
        us: Vec<f64>,
        vs: Vec<f64>,
    },
    Custom {
        spec: CustomStatistic,
        us: Vec<f64>,
        vs: Vec<f64>,
    },
}

impl Evaluator {
    pub(crate) fn for_kind(kind: StatisticKind, us: &[f64], vs: &[f64]) -> Result<Self> {
        let n = us.len();
        Ok(match kind {
            StatisticKind::Pearson => {
                let mean_u = us.iter().sum::<f64>() / n as f64;
                let mean_v = vs.iter().sum::<f64>() / n as f64;
                let cu: Vec<f64> = us.iter().map(|u| u - mean_u).collect();
                let cv: Vec<f64> = vs.iter().map(|v| v - mean_v).collect();
                let suu: f64 = cu.iter().map(|d| d * d).sum();
                let svv: f64 = cv.iter().map(|d| d * d).sum();
                if suu == 0.0 {
                    return Err(Error::DegenerateVariance("first margin"));
                }
                if svv == 0.0 {
                    return Err(Error::DegenerateVariance("second margin"));
                }
                Evaluator::Pearson {
                    cu,
                    cv,
                    norm: (suu * svv).sqrt(),
                }
            }
            StatisticKind::Kendall => {
                let sign_matrix = |xs: &[f64]| {
                    let mut m = vec![0i8; n * n];
                    for i in 0..n {
                        for j in 0..n {
                            m[i * n + j] = sign(xs[i] - xs[j]) as i8;
                        }
                    }
                    m
                };
                Evaluator::Kendall {
                    n,
                    su: sign_matrix(us),
                    sv: sign_matrix(vs),
                }
            }
            StatisticKind::HoeffdingDelta => {
                let le_matrix = |xs: &[f64]| {
                    let mut m = vec![0u8; n * n];
                    for i in 0..n {
                        for j in 0..n {
                            m[i * n + j] = (xs[j] <= xs[i]) as u8;
                        }
                    }
                    m
                };
                let u_le = le_matrix(us);
                let v_le = le_matrix(vs);
                let count = |m: &[u8]| -> Vec<u64> {
                    (0..n)
                        .map(|i| m[i * n..(i + 1) * n].iter().map(|&b| b as u64).sum())
                        .collect()
                };
                let r = count(&u_le);
                let s = count(&v_le);
                Evaluator::Hoeffding { n, u_le, v_le, r, s }
            }
            StatisticKind::Kappa => Evaluator::Kappa {
                n,
                atil: kappa::centered_distances(us),
                btil: kappa::centered_distances(vs),
            },
            StatisticKind::TauStar => Evaluator::TauStar {
                us: us.to_vec(),
                vs: vs.to_vec(),
            },
        })
    }

    pub(crate) fn for_custom(spec: CustomStatistic, us: &[f64], vs: &[f64]) -> Result<Self> {
        // Surface an over-budget enumeration once, up front.
        v_statistic_bruteforce_with_budget(
            spec.s_kernel.as_ref(),
            spec.t_kernel.as_ref(),
            spec.degree,
            us,
            vs,
            DEFAULT_TUPLE_BUDGET,
        )?;
        Ok(Evaluator::Custom {
            spec,
            us: us.to_vec(),
            vs: vs.to_vec(),
        })
    }

    /// The statistic on the identity pairing.
    pub(crate) fn observed(&self) -> f64 {
        let n = self.n();
        let identity: Vec<usize> = (0..n).collect();
        self.eval_permuted(&identity)
    }

    fn n(&self) -> usize {
        match self {
            Evaluator::Pearson { cu, .. } => cu.len(),
            Evaluator::Kendall { n, .. }
            | Evaluator::Hoeffding { n, .. }
            | Evaluator::Kappa { n, .. } => *n,
            Evaluator::TauStar { us, .. } | Evaluator::Custom { us, .. } => us.len(),
        }
    }

    /// The statistic on the pairing `(us[i], vs[pi[i]])`.
    pub(crate) fn eval_permuted(&self, pi: &[usize]) -> f64 {
        match self {
            Evaluator::Pearson { cu, cv, norm } => {
                let dot: f64 = cu.iter().zip(pi).map(|(u, &p)| u * cv[p]).sum();
                dot / norm
            }
            Evaluator::Kendall { n, su, sv } => {
                let mut net = 0i64;
                for i in 0..*n {
                    for j in (i + 1)..*n {
                        net += (su[i * n + j] * sv[pi[i] * n + pi[j]]) as i64;
                    }
                }
                net as f64 / (n * (n - 1) / 2) as f64
            }
            Evaluator::Hoeffding { n, u_le, v_le, r, s } => {
                let nf = *n as u64;
                let mut total = 0.0;
                for i in 0..*n {
                    let urow = &u_le[i * n..(i + 1) * n];
                    let vrow = &v_le[pi[i] * n..(pi[i] + 1) * n];
                    let mut c = 0u64;
                    for j in 0..*n {
                        c += (urow[j] & vrow[pi[j]]) as u64;
                    }
                    let gap = (nf * c) as f64 - (r[i] * s[pi[i]]) as f64;
                    total += gap * gap;
                }
                total / (*n as f64).powi(5)
            }
            Evaluator::Kappa { n, atil, btil } => {
                let mut total = 0.0;
                for i in 0..*n {
                    let arow = &atil[i * n..(i + 1) * n];
                    let brow = &btil[pi[i] * n..(pi[i] + 1) * n];
                    for j in 0..*n {
                        total += arow[j] * brow[pi[j]];
                    }
                }
                total / (n * n) as f64
            }
            Evaluator::TauStar { us, vs } => {
                let vperm: Vec<f64> = pi.iter().map(|&p| vs[p]).collect();
                tau_star_value(us, &vperm)
            }
            Evaluator::Custom { spec, us, vs } => {
                let vperm: Vec<f64> = pi.iter().map(|&p| vs[p]).collect();
                v_statistic_bruteforce_with_budget(
                    spec.s_kernel.as_ref(),
                    spec.t_kernel.as_ref(),
                    spec.degree,
                    us,
                    &vperm,
                    DEFAULT_TUPLE_BUDGET,
                )
                .expect("budget validated at construction")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{evaluate, StatisticKind};
    use approx::assert_relative_eq;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn evaluators_match_from_scratch_statistics() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for trial in 0..60 {
            let n = 5 + (trial % 14);
            // Mix continuous values with a coarse grid to exercise ties.
            let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
                (0..n)
                    .map(|_| {
                        if rng.gen_bool(0.5) {
                            rng.gen::<f64>()
                        } else {
                            (rng.gen_range(0..4) as f64) / 4.0
                        }
                    })
                    .collect()
            };
            let us = draw(&mut rng);
            let vs = draw(&mut rng);
            let mut pi: Vec<usize> = (0..n).collect();
            pi.shuffle(&mut rng);
            let vperm: Vec<f64> = pi.iter().map(|&p| vs[p]).collect();

            for kind in StatisticKind::ALL {
                let ev = Evaluator::for_kind(kind, &us, &vs).unwrap();
                let direct = evaluate(kind, &us, &vperm).unwrap().value;
                assert_relative_eq!(
                    ev.eval_permuted(&pi),
                    direct,
                    epsilon = 1e-12,
                    max_relative = 1e-12
                );
                let identity = evaluate(kind, &us, &vs).unwrap().value;
                assert_relative_eq!(ev.observed(), identity, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn pearson_evaluator_surfaces_degenerate_margins() {
        let err = Evaluator::for_kind(StatisticKind::Pearson, &[1.0, 1.0], &[0.0, 1.0]);
        assert!(matches!(err, Err(Error::DegenerateVariance(_))));
    }

    #[test]
    fn custom_evaluator_matches_builtin_kernels() {
        use crate::stats::vstat::kappa_kernel;
        let us = [0.1, 0.7, 0.4, 0.9, 0.2];
        let vs = [0.5, 0.3, 0.8, 0.1, 0.6];
        let spec = CustomStatistic {
            name: "kappa_raw".into(),
            degree: 4,
            s_kernel: Arc::new(|t: &[f64]| kappa_kernel(t)),
            t_kernel: Arc::new(|t: &[f64]| kappa_kernel(t)),
        };
        let ev = Evaluator::for_custom(spec, &us, &vs).unwrap();
        let builtin = evaluate(StatisticKind::Kappa, &us, &vs).unwrap().value;
        assert_relative_eq!(0.25 * ev.observed(), builtin, epsilon = 1e-12);
    }
}
