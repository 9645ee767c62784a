//! Closed-form data specifications (`const:c`, `powx:theta`, `powdelta:p`).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::mesh::Mesh1D;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DataSpec {
    /// `c` everywhere in the domain.
    Const(f64),
    /// `|x|^{-theta}`, truncated at the innermost nonzero node.
    PowX(f64),
    /// `delta(x)^p` with `delta = R - |x|`.
    PowDelta(f64),
    /// Explicit nodal values (all nodes).
    Nodal(Vec<f64>),
}

impl DataSpec {
    /// Nodal values on all mesh nodes; boundary nodes are zero.
    pub fn nodal(&self, mesh: &Mesh1D) -> Vec<f64> {
        let n = mesh.node_count();
        let mut v: Vec<f64> = match self {
            DataSpec::Const(c) => vec![*c; n],
            DataSpec::PowX(theta) => {
                let inner = mesh.nodes[mesh.origin_index() + 1];
                mesh.nodes
                    .iter()
                    .map(|x| {
                        let r = if *x == 0.0 { inner } else { x.abs() };
                        r.powf(-theta)
                    })
                    .collect()
            }
            DataSpec::PowDelta(p) => (0..n).map(|i| mesh.delta(i).max(0.0).powf(*p)).collect(),
            DataSpec::Nodal(values) => {
                assert_eq!(values.len(), n, "nodal data length mismatch");
                values.clone()
            }
        };
        v[0] = 0.0;
        v[n - 1] = 0.0;
        v
    }

    pub fn is_zero(&self) -> bool {
        match self {
            DataSpec::Const(c) => *c == 0.0,
            DataSpec::Nodal(v) => v.iter().all(|x| *x == 0.0),
            _ => false,
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        match self {
            DataSpec::Const(c) => *c >= 0.0,
            DataSpec::Nodal(v) => v.iter().all(|x| *x >= 0.0),
            _ => true,
        }
    }
}

impl fmt::Display for DataSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataSpec::Const(c) => write!(f, "const:{c}"),
            DataSpec::PowX(t) => write!(f, "powx:{t}"),
            DataSpec::PowDelta(p) => write!(f, "powdelta:{p}"),
            DataSpec::Nodal(v) => write!(f, "nodal[{}]", v.len()),
        }
    }
}

impl FromStr for DataSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, value) = s
            .trim()
            .split_once(':')
            .ok_or_else(|| Error::Validation(format!("data spec `{s}` lacks `kind:value`")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Validation(format!("bad number in data spec `{s}`")))?;
        if !value.is_finite() {
            return Err(Error::Validation(format!("non-finite value in `{s}`")));
        }
        match kind.trim() {
            "const" => Ok(DataSpec::Const(value)),
            "powx" => Ok(DataSpec::PowX(value)),
            "powdelta" => Ok(DataSpec::PowDelta(value)),
            other => Err(Error::Validation(format!("unknown data kind `{other}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_mesh;

    #[test]
    fn parses_tokens() {
        assert_eq!("powx:0.3".parse::<DataSpec>().unwrap(), DataSpec::PowX(0.3));
        assert_eq!("const:1".parse::<DataSpec>().unwrap(), DataSpec::Const(1.0));
        assert_eq!(
            "powdelta:0.5".parse::<DataSpec>().unwrap(),
            DataSpec::PowDelta(0.5)
        );
        assert!("pow:1".parse::<DataSpec>().is_err());
        assert!("const".parse::<DataSpec>().is_err());
    }

    #[test]
    fn powx_is_truncated_at_innermost_node() {
        let mesh = build_mesh(1.0, 16, 1.0, 1.0).unwrap();
        let v = DataSpec::PowX(0.5).nodal(&mesh);
        let o = mesh.origin_index();
        assert_eq!(v[o], v[o + 1]);
        assert!((v[o + 1] - (0.125f64).powf(-0.5)).abs() < 1e-14);
        assert_eq!(v[0], 0.0);
    }
}
