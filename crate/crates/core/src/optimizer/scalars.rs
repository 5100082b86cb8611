use log::debug;

use super::{SgmlParams, SCALAR_ACCEPT_SLACK};
use crate::error::Error;
use crate::graph::{connected_components, Coloring};
use crate::matrix::{norm2, MetricMatrix};
use crate::spectral::{
    gdpa_scalars, jacobi_eigen, lobpcg_first, scaled_gershgorin, EigenPair, GdpaScalars,
};

const REFINE_TOL: f64 = 1e-12;
/// Largest component always retried with Jacobi after LOBPCG fails.
const JACOBI_RETRY_DIM: usize = 64;
/// Largest component retried with Jacobi when LOBPCG did not converge.
const JACOBI_MAX_DIM: usize = 512;

/// First eigenpair of one connected component.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentEigen {
    pub nodes: Vec<usize>,
    pub value: f64,
    pub vector: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct RefreshOutcome {
    pub scalars: GdpaScalars,
    /// First eigenvectors of all components, scattered into one vector.
    pub warm: Vec<f64>,
    pub components: Vec<ComponentEigen>,
    pub solves: usize,
    /// Components that kept their previous scalars.
    pub rejected: usize,
    /// Some component had a zero or sign-inconsistent first eigenvector.
    pub degenerate: bool,
}

/// New GDPA scalars for `m`, computed per connected component.
///
/// A component adopts the new scalars only when its lowest scaled disc
/// left-end reaches the disc margin (or at least does not drop); otherwise it
/// keeps `previous`, which the preceding linear program already made valid.
pub fn refresh_scalars(
    m: &MetricMatrix,
    coloring: &Coloring,
    previous: &GdpaScalars,
    warm: &[f64],
    params: &SgmlParams,
) -> RefreshOutcome {
    let k = m.dim();
    let mut s = previous.values().to_vec();
    let mut warm_out = vec![0.0; k];
    let mut components = Vec::new();
    let mut solves = 0;
    let mut rejected = 0;
    let mut degenerate = false;

    for nodes in connected_components(m) {
        if nodes.len() == 1 {
            let i = nodes[0];
            s[i] = 1.0;
            warm_out[i] = 1.0;
            components.push(ComponentEigen {
                nodes,
                value: m.get(i, i),
                vector: vec![1.0],
            });
            continue;
        }
        let sub = m.submatrix(&nodes);
        let sub_coloring = Coloring(nodes.iter().map(|&i| coloring.color(i)).collect());
        let prev_sub = GdpaScalars::new(nodes.iter().map(|&i| s[i]).collect())
            .unwrap_or_else(|_| GdpaScalars::ones(nodes.len()));
        let prev_bound = scaled_gershgorin(&sub, &prev_sub).lower_bound;
        let target = params.disc_margin.min(prev_bound) - SCALAR_ACCEPT_SLACK;
        let start = restrict(warm, &nodes);

        let attempt = ComponentAttempt {
            sub: &sub,
            coloring: &sub_coloring,
            target,
        };
        let mut last: Option<EigenPair> = None;
        let mut accepted: Option<GdpaScalars> = None;
        let mut saw_degenerate = false;
        let mut no_convergence = false;

        let plans = [
            (start.clone(), params.lobpcg_tol),
            (None, REFINE_TOL),
        ];
        for (n, (warm_vec, tol)) in plans.into_iter().enumerate() {
            let seed = if n == 0 {
                warm_vec
            } else {
                last.as_ref().map(|p| p.vector.clone()).or(start.clone())
            };
            solves += 1;
            let pair = match lobpcg_first(&sub, seed.as_deref(), tol, params.lobpcg_max_iter) {
                Ok(r) => r.pair,
                Err(Error::NoConvergence { best, .. }) => {
                    no_convergence = true;
                    *best
                }
                Err(e) => {
                    debug!("eigen solve failed: {e}");
                    continue;
                }
            };
            match attempt.check(&pair) {
                Check::Accepted(sc) => {
                    last = Some(pair);
                    accepted = Some(sc);
                    break;
                }
                Check::Degenerate => saw_degenerate = true,
                Check::Short => {}
            }
            last = Some(pair);
        }
        let jacobi_retry = nodes.len() <= JACOBI_RETRY_DIM
            || (no_convergence && nodes.len() <= JACOBI_MAX_DIM);
        if accepted.is_none() && jacobi_retry {
            solves += 1;
            let pair = jacobi_eigen(&sub).smallest();
            match attempt.check(&pair) {
                Check::Accepted(sc) => accepted = Some(sc),
                Check::Degenerate => saw_degenerate = true,
                Check::Short => {}
            }
            last = Some(pair);
        }

        match accepted {
            Some(sc) => {
                for (&i, &v) in nodes.iter().zip(sc.values()) {
                    s[i] = v;
                }
            }
            None => {
                rejected += 1;
                if saw_degenerate {
                    degenerate = true;
                }
            }
        }
        let pair = last.unwrap_or_else(|| jacobi_eigen(&sub).smallest());
        for (&i, &v) in nodes.iter().zip(&pair.vector) {
            warm_out[i] = v;
        }
        components.push(ComponentEigen {
            nodes,
            value: pair.value,
            vector: pair.vector,
        });
    }

    RefreshOutcome {
        scalars: GdpaScalars::new(s).unwrap_or_else(|_| previous.clone()),
        warm: warm_out,
        components,
        solves,
        rejected,
        degenerate,
    }
}

enum Check {
    Accepted(GdpaScalars),
    Degenerate,
    Short,
}

struct ComponentAttempt<'a> {
    sub: &'a MetricMatrix,
    coloring: &'a Coloring,
    target: f64,
}

impl ComponentAttempt<'_> {
    fn check(&self, pair: &EigenPair) -> Check {
        match gdpa_scalars(self.sub, self.coloring, pair) {
            Ok(sc) => {
                if scaled_gershgorin(self.sub, &sc).lower_bound >= self.target {
                    Check::Accepted(sc)
                } else {
                    Check::Short
                }
            }
            Err(Error::DegenerateEigenvector { .. } | Error::SignPatternViolation { .. }) => {
                Check::Degenerate
            }
            Err(_) => Check::Short,
        }
    }
}

fn restrict(warm: &[f64], nodes: &[usize]) -> Option<Vec<f64>> {
    if nodes.iter().any(|&i| i >= warm.len()) {
        return None;
    }
    let v: Vec<f64> = nodes.iter().map(|&i| warm[i]).collect();
    if norm2(&v) > 0.0 {
        Some(v)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Color;

    #[test]
    fn singleton_components_get_unit_scalars() {
        let m = MetricMatrix::from_diagonal(&[1.0, 2.0]);
        let out = refresh_scalars(
            &m,
            &Coloring::all_blue(2),
            &GdpaScalars::new(vec![3.0, 4.0]).unwrap(),
            &[],
            &SgmlParams::default(),
        );
        assert_eq!(out.scalars.values(), &[1.0, 1.0]);
        assert_eq!(out.components.len(), 2);
        assert_eq!(out.components[1].value, 2.0);
    }

    #[test]
    fn aligned_component_scalars() {
        let m = MetricMatrix::from_rows(&[
            vec![2.0, -2.0, -1.0, 0.0],
            vec![-2.0, 5.0, -2.0, 0.0],
            vec![-1.0, -2.0, 4.0, 0.0],
            vec![0.0, 0.0, 0.0, 0.7],
        ])
        .unwrap();
        let coloring = Coloring(vec![Color::Blue; 4]);
        let out = refresh_scalars(&m, &coloring, &GdpaScalars::ones(4), &[], &SgmlParams::default());
        assert_eq!(out.rejected, 0);
        let ends = scaled_gershgorin(&m, &out.scalars).left_ends();
        for l in &ends[..3] {
            assert!((l - out.components[0].value).abs() < 1e-6);
        }
        assert_eq!(ends[3], 0.7);
    }
}
