//! JSON formats for matrices, channels, subspaces and decompositions.
//!
//! A matrix is `{"rows": r, "cols": c, "data": [[[re, im], ...], ...]}` with
//! one inner array per row and an optional `"kind"` tag. A channel is
//! `{"dim_in": n, "dim_out": m, "kraus": [matrix, ...]}`; a `"choi"` matrix
//! may be given instead of `"kraus"`.

use serde::{Deserialize, Serialize};

use crate::algebra::OperatorSubspace;
use crate::channel::{kraus_from_choi, Channel};
use crate::dstoch::DoublyStochasticMatrix;
use crate::error::{Error, Result};
use crate::matcore::{c, ComplexMatrix, RealMatrix, Tolerances};
use crate::schur::{CorrelationBlockDecomposition, CorrelationMatrix};

pub const KIND_CORRELATION: &str = "correlation";
pub const KIND_DOUBLY_STOCHASTIC: &str = "doubly_stochastic";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
}

impl MatrixJson {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        MatrixJson {
            rows: m.nrows(),
            cols: m.ncols(),
            data: m
                .row_iter()
                .map(|r| r.iter().map(|z| [z.re, z.im]).collect())
                .collect(),
            kind: None,
        }
    }

    pub fn from_real(m: &RealMatrix) -> Self {
        MatrixJson {
            rows: m.nrows(),
            cols: m.ncols(),
            data: m
                .row_iter()
                .map(|r| r.iter().map(|&x| [x, 0.0]).collect())
                .collect(),
            kind: None,
        }
    }

    pub fn with_kind(mut self, kind: &str) -> Self {
        self.kind = Some(kind.to_string());
        self
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        if self.data.len() != self.rows {
            return Err(Error::Format(format!(
                "\"rows\" is {} but data has {} rows",
                self.rows,
                self.data.len()
            )));
        }
        if let Some((i, row)) = self.data.iter().enumerate().find(|(_, r)| r.len() != self.cols) {
            return Err(Error::Format(format!(
                "\"cols\" is {} but row {i} has {} entries",
                self.cols,
                row.len()
            )));
        }
        if self.data.iter().flatten().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Format("matrix has non-finite entries".into()));
        }
        Ok(ComplexMatrix::from_fn(self.rows, self.cols, |i, j| {
            let [re, im] = self.data[i][j];
            c(re, im)
        }))
    }

    /// Real part, rejecting imaginary parts above `tol_eq`.
    pub fn to_real(&self, tol: &Tolerances) -> Result<RealMatrix> {
        let m = self.to_matrix()?;
        if let Some(z) = m.iter().find(|z| z.im.abs() > tol.tol_eq) {
            return Err(Error::Format(format!(
                "expected a real matrix, found entry {z}"
            )));
        }
        Ok(m.map(|z| z.re))
    }

    fn expect_kind(&self, kind: &str) -> Result<()> {
        match &self.kind {
            Some(k) if k != kind => Err(Error::Format(format!(
                "expected kind \"{kind}\", found \"{k}\""
            ))),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelJson {
    pub dim_in: usize,
    pub dim_out: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kraus: Option<Vec<MatrixJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub choi: Option<MatrixJson>,
}

impl ChannelJson {
    pub fn from_channel(ch: &Channel) -> Self {
        ChannelJson {
            dim_in: ch.dim_in(),
            dim_out: ch.dim_out(),
            kraus: Some(ch.kraus().iter().map(MatrixJson::from_matrix).collect()),
            choi: None,
        }
    }

    /// Builds the channel. A Choi form is checked for positivity.
    pub fn to_channel(&self, tol: &Tolerances) -> Result<Channel> {
        match (&self.kraus, &self.choi) {
            (Some(kraus), None) => {
                let kraus = kraus
                    .iter()
                    .map(MatrixJson::to_matrix)
                    .collect::<Result<Vec<_>>>()?;
                Channel::new(self.dim_in, self.dim_out, kraus)
            }
            (None, Some(choi)) => kraus_from_choi(&choi.to_matrix()?, self.dim_in, self.dim_out, tol),
            (Some(_), Some(_)) => Err(Error::Format(
                "give either \"kraus\" or \"choi\", not both".into(),
            )),
            (None, None) => Err(Error::Format("missing \"kraus\" field".into())),
        }
    }
}

fn from_str<'a, T: Deserialize<'a>>(text: &'a str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
}

pub fn parse_matrix(text: &str) -> Result<ComplexMatrix> {
    from_str::<MatrixJson>(text)?.to_matrix()
}

pub fn parse_channel(text: &str, tol: &Tolerances) -> Result<Channel> {
    from_str::<ChannelJson>(text)?.to_channel(tol)
}

pub fn parse_correlation(text: &str, tol: &Tolerances) -> Result<CorrelationMatrix> {
    let json: MatrixJson = from_str(text)?;
    json.expect_kind(KIND_CORRELATION)?;
    CorrelationMatrix::new_with(json.to_matrix()?, tol)
}

pub fn parse_doubly_stochastic(text: &str, tol: &Tolerances) -> Result<DoublyStochasticMatrix> {
    let json: MatrixJson = from_str(text)?;
    json.expect_kind(KIND_DOUBLY_STOCHASTIC)?;
    DoublyStochasticMatrix::new(json.to_real(tol)?, tol)
}

pub fn correlation_to_json(cm: &CorrelationMatrix) -> MatrixJson {
    MatrixJson::from_matrix(cm.matrix()).with_kind(KIND_CORRELATION)
}

pub fn ds_to_json(d: &DoublyStochasticMatrix) -> MatrixJson {
    MatrixJson::from_real(d.matrix()).with_kind(KIND_DOUBLY_STOCHASTIC)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubspaceJson {
    pub ambient_dim: usize,
    pub dim: usize,
    pub star_closed: bool,
    pub contains_identity: bool,
    pub basis: Vec<MatrixJson>,
}

impl SubspaceJson {
    pub fn from_subspace(s: &OperatorSubspace) -> Self {
        SubspaceJson {
            ambient_dim: s.ambient_dim(),
            dim: s.dim(),
            star_closed: s.star_closed(),
            contains_identity: s.contains_identity(),
            basis: s.basis().iter().map(MatrixJson::from_matrix).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionJson {
    pub blocks: Vec<Vec<usize>>,
    pub phases: Vec<Vec<[f64; 2]>>,
    pub quotient: MatrixJson,
    pub permutation: Vec<usize>,
}

impl DecompositionJson {
    pub fn from_decomposition(d: &CorrelationBlockDecomposition) -> Self {
        DecompositionJson {
            blocks: d.blocks.clone(),
            phases: d
                .phase_vectors
                .iter()
                .map(|v| v.iter().map(|z| [z.re, z.im]).collect())
                .collect(),
            quotient: correlation_to_json(&d.quotient),
            permutation: d.permutation.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::same_map;
    use crate::gen::{random_correlation_matrix, random_ds, random_tp_channel, Seed};
    use crate::matcore::identity;

    #[test]
    fn matrix_roundtrip() {
        let m = ComplexMatrix::from_fn(2, 3, |i, j| c(i as f64 + 0.5, -(j as f64)));
        let text = serde_json::to_string(&MatrixJson::from_matrix(&m)).unwrap();
        assert_eq!(parse_matrix(&text).unwrap(), m);
        assert!(text.starts_with("{\"rows\":2,\"cols\":3,\"data\":[[[0.5,-0.0]"));
    }

    #[test]
    fn malformed_matrices() {
        assert!(matches!(parse_matrix("{\"rows\":2}"), Err(Error::Format(_))));
        let short = r#"{"rows":2,"cols":1,"data":[[[1,0]]]}"#;
        assert!(matches!(parse_matrix(short), Err(Error::Format(_))));
        let ragged = r#"{"rows":2,"cols":2,"data":[[[1,0],[0,0]],[[1,0]]]}"#;
        assert!(matches!(parse_matrix(ragged), Err(Error::Format(_))));
        let extra = r#"{"rows":1,"cols":1,"data":[[[1,0]]],"color":"red"}"#;
        assert!(matches!(parse_matrix(extra), Err(Error::Format(_))));
    }

    #[test]
    fn channel_roundtrip() {
        let tol = Tolerances::default();
        let ch = random_tp_channel(2, 3, 2, Seed(5)).unwrap();
        let text = serde_json::to_string(&ChannelJson::from_channel(&ch)).unwrap();
        let back = parse_channel(&text, &tol).unwrap();
        assert_eq!(back, ch);
    }

    #[test]
    fn channel_from_choi() {
        let tol = Tolerances::default();
        let ch = random_tp_channel(2, 2, 3, Seed(6)).unwrap();
        let json = ChannelJson {
            dim_in: 2,
            dim_out: 2,
            kraus: None,
            choi: Some(MatrixJson::from_matrix(&crate::channel::choi_matrix(&ch))),
        };
        let back = json.to_channel(&tol).unwrap();
        assert!(same_map(&back, &ch, &tol));

        let mut bad = identity(4);
        bad[(3, 3)] = c(-1.0, 0.0);
        let json = ChannelJson {
            dim_in: 2,
            dim_out: 2,
            kraus: None,
            choi: Some(MatrixJson::from_matrix(&bad)),
        };
        assert!(matches!(json.to_channel(&tol), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn channel_dimension_mismatch() {
        let text = r#"{"dim_in":2,"dim_out":2,"kraus":[{"rows":3,"cols":2,"data":[[[1,0],[0,0]],[[0,0],[1,0]],[[0,0],[0,0]]]}]}"#;
        assert!(matches!(
            parse_channel(text, &Tolerances::default()),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn tagged_matrices() {
        let tol = Tolerances::default();
        let cm = random_correlation_matrix(3, 2, Seed(1)).unwrap();
        let text = serde_json::to_string(&correlation_to_json(&cm)).unwrap();
        assert!(text.contains("\"kind\":\"correlation\""));
        assert_eq!(parse_correlation(&text, &tol).unwrap(), cm);
        assert!(parse_doubly_stochastic(&text, &tol).is_err());

        let d = random_ds(4, 3, Seed(2)).unwrap();
        let text = serde_json::to_string(&ds_to_json(&d)).unwrap();
        assert_eq!(parse_doubly_stochastic(&text, &tol).unwrap(), d);
    }
}
