//! JSON description of homogeneous distributions.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{DppKernel, ExplicitPolynomial, HomogeneousDistribution};
use crate::error::{Error, Result};
use crate::matroids::spec::{from_json_str, from_json_value, split_tag};
use crate::matroids::MatroidSpec;
use crate::subset::Subset;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub set: Vec<usize>,
    pub coef: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DistributionSpec {
    UniformBases {
        matroid: MatroidSpec,
        #[serde(skip_serializing_if = "Option::is_none")]
        lambda: Option<Vec<f64>>,
    },
    ClusterLayer {
        matroid: MatroidSpec,
        k: usize,
        q: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        lambda: Option<Vec<f64>>,
    },
    DppAlpha {
        kernel: Vec<Vec<f64>>,
        k: usize,
        alpha: f64,
    },
    Explicit {
        n: usize,
        d: usize,
        terms: Vec<Term>,
    },
}

impl DistributionSpec {
    pub fn from_json(text: &str) -> Result<DistributionSpec> {
        let value: Value = from_json_str(text)?;
        DistributionSpec::from_value(&value)
    }

    pub fn from_value(value: &Value) -> Result<DistributionSpec> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Bases {
            matroid: Value,
            lambda: Option<Vec<f64>>,
        }
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Layer {
            matroid: Value,
            k: usize,
            q: f64,
            lambda: Option<Vec<f64>>,
        }
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Dpp {
            kernel: Vec<Vec<f64>>,
            k: usize,
            alpha: f64,
        }
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Explicit {
            n: usize,
            d: usize,
            terms: Vec<Term>,
        }

        let matroid = |v: &Value| MatroidSpec::from_value(v).map_err(|e| e.within("matroid"));
        let (tag, body) = split_tag(value)?;
        Ok(match tag {
            "uniform_bases" => {
                let b: Bases = from_json_value(body)?;
                DistributionSpec::UniformBases { matroid: matroid(&b.matroid)?, lambda: b.lambda }
            }
            "cluster_layer" => {
                let l: Layer = from_json_value(body)?;
                DistributionSpec::ClusterLayer { matroid: matroid(&l.matroid)?, k: l.k, q: l.q, lambda: l.lambda }
            }
            "dpp_alpha" => {
                let d: Dpp = from_json_value(body)?;
                DistributionSpec::DppAlpha { kernel: d.kernel, k: d.k, alpha: d.alpha }
            }
            "explicit" => {
                let e: Explicit = from_json_value(body)?;
                DistributionSpec::Explicit { n: e.n, d: e.d, terms: e.terms }
            }
            other => return Err(Error::input_at("type", format!("unknown distribution type `{other}`"))),
        })
    }

    pub fn build(&self) -> Result<HomogeneousDistribution> {
        match self {
            DistributionSpec::UniformBases { matroid, lambda } => {
                let m = matroid.build().map_err(|e| e.within("matroid"))?;
                HomogeneousDistribution::uniform_bases(m, lambda.clone())
            }
            DistributionSpec::ClusterLayer { matroid, k, q, lambda } => {
                let m = matroid.build().map_err(|e| e.within("matroid"))?;
                HomogeneousDistribution::cluster_layer(m, *k, *q, lambda.clone())
            }
            DistributionSpec::DppAlpha { kernel, k, alpha } => {
                HomogeneousDistribution::dpp_alpha(kernel_from_rows(kernel)?, *k, *alpha)
            }
            DistributionSpec::Explicit { n, d, terms } => {
                let parsed = terms
                    .iter()
                    .enumerate()
                    .map(|(i, t)| {
                        Subset::new(t.set.clone()).map(|s| (s, t.coef)).map_err(|e| e.within(&format!("terms[{i}].set")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                HomogeneousDistribution::explicit(ExplicitPolynomial::new(*n, *d, parsed)?)
            }
        }
    }
}

/// Builds and validates a kernel from row vectors.
pub fn kernel_from_rows(rows: &[Vec<f64>]) -> Result<DppKernel> {
    let n = rows.len();
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(Error::input_at(format!("kernel[{i}]"), format!("row has {} entries, expected {n}", r.len())));
    }
    DppKernel::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// Parses a JSON distribution description and builds it.
pub fn parse_distribution(text: &str) -> Result<HomogeneousDistribution> {
    DistributionSpec::from_json(text)?.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_each_family() {
        let u = parse_distribution(r#"{"type":"uniform_bases","matroid":{"type":"uniform","n":4,"r":2}}"#).unwrap();
        assert_eq!((u.family(), u.n(), u.d()), ("uniform_bases", 4, 2));
        let c = parse_distribution(
            r#"{"type":"cluster_layer","matroid":{"type":"uniform","n":3,"r":2},"k":2,"q":0.5,"lambda":[1,2,3]}"#,
        )
        .unwrap();
        assert_eq!((c.family(), c.d()), ("cluster_layer", 2));
        let d = parse_distribution(r#"{"type":"dpp_alpha","kernel":[[2,1],[1,2]],"k":1,"alpha":0.5}"#).unwrap();
        assert_eq!(d.n(), 2);
        let e = parse_distribution(
            r#"{"type":"explicit","n":4,"d":2,"terms":[{"set":[0,1],"coef":1},{"set":[2,3],"coef":2.5}]}"#,
        )
        .unwrap();
        assert_eq!(e.d(), 2);
    }

    #[test]
    fn errors_carry_paths() {
        let path_of = |text: &str| match parse_distribution(text) {
            Err(Error::Input { path, .. }) => path,
            other => panic!("{other:?}"),
        };
        assert_eq!(
            path_of(r#"{"type":"uniform_bases","matroid":{"type":"uniform","n":4,"r":2},"lambda":[1,1,0,1]}"#),
            "lambda[2]"
        );
        assert_eq!(path_of(r#"{"type":"uniform_bases","matroid":{"type":"uniform","n":4,"r":9}}"#), "matroid.r");
        assert_eq!(path_of(r#"{"type":"dpp_alpha","kernel":[[1,0],[0]],"k":1,"alpha":0.5}"#), "kernel[1]");
        assert_eq!(path_of(r#"{"type":"cluster_layer","matroid":{"type":"uniform","n":3,"r":2},"k":2,"q":2}"#), "q");
        assert_eq!(path_of(r#"{"type":"explicit","n":3,"d":1,"terms":[{"set":[0,1],"coef":1}]}"#), "terms[0].set");
    }
}
