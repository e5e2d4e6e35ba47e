//! JSON file schemas for every system kind.

use crate::classical::ClassicalRule;
use crate::error::{Error, Result};
use crate::linalg::{Mat, C64};
use crate::qca::{Gate, QcaLayer, QcaRepr, QcaSystem, TensorCellStructure};
use crate::walk::{BandedUnitary, PartitionedLayer, SumCellStructure, WalkCircuit, WalkLayer};
use crate::walk_ti::LaurentUnitary;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// A complex matrix as separate real and imaginary row lists.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MatrixJson {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_mat(m: &Mat) -> Self {
        let rows = |f: fn(&C64) -> f64| {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect())
                .collect()
        };
        MatrixJson {
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }

    pub fn to_mat(&self) -> Result<Mat> {
        let r = self.re.len();
        let c = self.re.first().map_or(0, |row| row.len());
        let ragged = |rows: &[Vec<f64>]| rows.len() != r || rows.iter().any(|row| row.len() != c);
        if ragged(&self.re) || ragged(&self.im) {
            return Err(Error::Parse(
                "matrix rows of unequal length or mismatched re/im shapes".into(),
            ));
        }
        Ok(Mat::from_fn(r, c, |i, j| {
            C64::new(self.re[i][j], self.im[i][j])
        }))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct WalkBlockJson {
    pub x: usize,
    pub y: usize,
    #[serde(flatten)]
    pub matrix: MatrixJson,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct WalkJson {
    #[serde(rename = "M")]
    pub m: usize,
    pub dims: Vec<usize>,
    pub band: usize,
    pub blocks: Vec<WalkBlockJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SiteBlockJson {
    pub sites: Vec<usize>,
    #[serde(flatten)]
    pub matrix: MatrixJson,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WalkLayerJson {
    Shift { by: i64 },
    Partition { blocks: Vec<SiteBlockJson> },
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct WalkCircuitJson {
    #[serde(rename = "M")]
    pub m: usize,
    pub dims: Vec<usize>,
    pub layers: Vec<WalkLayerJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TiCoeffJson {
    pub x: i64,
    #[serde(flatten)]
    pub matrix: MatrixJson,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TiWalkJson {
    pub d: usize,
    #[serde(rename = "L")]
    pub width: usize,
    pub coeffs: Vec<TiCoeffJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CellBlockJson {
    pub cells: Vec<usize>,
    #[serde(flatten)]
    pub matrix: MatrixJson,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QcaLayerJson {
    Partition {
        blocks: Vec<CellBlockJson>,
    },
    Shift {
        by: i64,
    },
    FactorShift {
        factors: Vec<usize>,
        shifts: Vec<i64>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct QcaCircuitJson {
    #[serde(rename = "N")]
    pub n: usize,
    pub dims: Vec<usize>,
    pub layers: Vec<QcaLayerJson>,
}

/// A global unitary: either dense (`re`, `im`) or a phased permutation of basis
/// configurations (`image`, `phase_re`, `phase_im`).
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct QcaGlobalJson {
    #[serde(rename = "N")]
    pub n: usize,
    pub dims: Vec<usize>,
    pub band: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub re: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_re: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_im: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ClassicalRuleJson {
    pub q: usize,
    pub radius: usize,
    pub table: Vec<usize>,
    pub inv_radius: usize,
    pub inv_table: Vec<usize>,
}

/// Raw file contents, tagged by `"type"`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SystemFile {
    Walk(WalkJson),
    WalkCircuit(WalkCircuitJson),
    TiWalk(TiWalkJson),
    QcaCircuit(QcaCircuitJson),
    QcaGlobal(QcaGlobalJson),
    ClassicalRule(ClassicalRuleJson),
}

/// A validated system of any kind.
#[derive(Clone, Debug)]
pub enum System {
    Walk(BandedUnitary),
    WalkCircuit(WalkCircuit),
    TiWalk(LaurentUnitary),
    Qca(QcaSystem),
    Classical(ClassicalRule),
}

impl System {
    pub fn kind(&self) -> &'static str {
        match self {
            System::Walk(_) => "walk",
            System::WalkCircuit(_) => "walk_circuit",
            System::TiWalk(_) => "ti_walk",
            System::Qca(q) => match q.repr() {
                QcaRepr::Circuit(_) => "qca_circuit",
                _ => "qca_global",
            },
            System::Classical(_) => "classical_rule",
        }
    }

    pub fn from_file(file: &SystemFile) -> Result<System> {
        match file {
            SystemFile::Walk(w) => walk_from_json(w).map(System::Walk),
            SystemFile::WalkCircuit(c) => walk_circuit_from_json(c).map(System::WalkCircuit),
            SystemFile::TiWalk(t) => {
                let entries = t
                    .coeffs
                    .iter()
                    .map(|c| Ok((c.x, c.matrix.to_mat()?)))
                    .collect::<Result<_>>()?;
                LaurentUnitary::new(t.d, t.width, entries).map(System::TiWalk)
            }
            SystemFile::QcaCircuit(c) => qca_circuit_from_json(c).map(System::Qca),
            SystemFile::QcaGlobal(g) => qca_global_from_json(g).map(System::Qca),
            SystemFile::ClassicalRule(r) => ClassicalRule::new(
                r.q,
                r.radius,
                r.table.clone(),
                r.inv_radius,
                r.inv_table.clone(),
            )
            .map(System::Classical),
        }
    }

    pub fn to_file(&self) -> SystemFile {
        match self {
            System::Walk(u) => SystemFile::Walk(walk_to_json(u)),
            System::WalkCircuit(c) => SystemFile::WalkCircuit(walk_circuit_to_json(c)),
            System::TiWalk(u) => SystemFile::TiWalk(TiWalkJson {
                d: u.d(),
                width: u.width(),
                coeffs: u
                    .coefficients()
                    .into_iter()
                    .map(|(x, m)| TiCoeffJson {
                        x,
                        matrix: MatrixJson::from_mat(&m),
                    })
                    .collect(),
            }),
            System::Qca(q) => qca_to_json(q),
            System::Classical(r) => SystemFile::ClassicalRule(ClassicalRuleJson {
                q: r.q(),
                radius: r.radius(),
                table: r.table().to_vec(),
                inv_radius: r.inv_radius(),
                inv_table: r.inv_table().to_vec(),
            }),
        }
    }

    pub fn parse(text: &str) -> Result<System> {
        let file: SystemFile = serde_json::from_str(text)?;
        System::from_file(&file)
    }

    pub fn load(path: &Path) -> Result<System> {
        System::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

fn check_ring(count: usize, dims: &[usize], what: &str) -> Result<()> {
    if dims.len() != count {
        return Err(Error::Parse(format!(
            "{what} count {count} but {} dims",
            dims.len()
        )));
    }
    Ok(())
}

fn walk_from_json(w: &WalkJson) -> Result<BandedUnitary> {
    check_ring(w.m, &w.dims, "site")?;
    let s = SumCellStructure::new(w.dims.clone())?;
    let blocks = w
        .blocks
        .iter()
        .map(|b| Ok((b.x, b.y, b.matrix.to_mat()?)))
        .collect::<Result<Vec<_>>>()?;
    BandedUnitary::from_blocks(s, w.band, &blocks)
}

fn walk_to_json(u: &BandedUnitary) -> WalkJson {
    let s = u.structure();
    let m = s.sites();
    let mut blocks = Vec::new();
    for x in 0..m {
        for y in 0..m {
            if s.distance(x, y) > u.band() {
                continue;
            }
            let b = u.block(x, y);
            if b.iter().any(|z| *z != C64::new(0.0, 0.0)) {
                blocks.push(WalkBlockJson {
                    x,
                    y,
                    matrix: MatrixJson::from_mat(&b),
                });
            }
        }
    }
    WalkJson {
        m,
        dims: s.dims().to_vec(),
        band: u.band(),
        blocks,
    }
}

fn walk_circuit_from_json(c: &WalkCircuitJson) -> Result<WalkCircuit> {
    check_ring(c.m, &c.dims, "site")?;
    let s = SumCellStructure::new(c.dims.clone())?;
    let layers = c
        .layers
        .iter()
        .map(|l| {
            Ok(match l {
                WalkLayerJson::Shift { by } => WalkLayer::Shift(*by),
                WalkLayerJson::Partition { blocks } => WalkLayer::Partition(PartitionedLayer::new(
                    s.clone(),
                    blocks
                        .iter()
                        .map(|b| Ok((b.sites.clone(), b.matrix.to_mat()?)))
                        .collect::<Result<_>>()?,
                )?),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let circuit = WalkCircuit {
        structure: s,
        layers,
    };
    circuit.to_banded()?;
    Ok(circuit)
}

fn walk_circuit_to_json(c: &WalkCircuit) -> WalkCircuitJson {
    WalkCircuitJson {
        m: c.structure.sites(),
        dims: c.structure.dims().to_vec(),
        layers: c
            .layers
            .iter()
            .map(|l| match l {
                WalkLayer::Shift(k) => WalkLayerJson::Shift { by: *k },
                WalkLayer::Partition(p) => WalkLayerJson::Partition {
                    blocks: p
                        .blocks
                        .iter()
                        .map(|(sites, u)| SiteBlockJson {
                            sites: sites.clone(),
                            matrix: MatrixJson::from_mat(u),
                        })
                        .collect(),
                },
            })
            .collect(),
    }
}

fn qca_circuit_from_json(c: &QcaCircuitJson) -> Result<QcaSystem> {
    check_ring(c.n, &c.dims, "cell")?;
    let s = TensorCellStructure::new(c.dims.clone())?;
    let layers = c
        .layers
        .iter()
        .map(|l| {
            Ok(match l {
                QcaLayerJson::Partition { blocks } => QcaLayer::Partition(
                    blocks
                        .iter()
                        .map(|b| {
                            Ok(Gate {
                                cells: b.cells.clone(),
                                unitary: b.matrix.to_mat()?,
                            })
                        })
                        .collect::<Result<_>>()?,
                ),
                QcaLayerJson::Shift { by } => QcaLayer::Shift(*by),
                QcaLayerJson::FactorShift { factors, shifts } => QcaLayer::FactorShift {
                    factors: factors.clone(),
                    shifts: shifts.clone(),
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    QcaSystem::circuit(s, layers)
}

fn qca_global_from_json(g: &QcaGlobalJson) -> Result<QcaSystem> {
    check_ring(g.n, &g.dims, "cell")?;
    let s = TensorCellStructure::new(g.dims.clone())?;
    match (&g.re, &g.im, &g.image) {
        (Some(re), Some(im), None) => {
            let m = MatrixJson {
                re: re.clone(),
                im: im.clone(),
            }
            .to_mat()?;
            QcaSystem::dense(s, g.band, m)
        }
        (None, None, Some(image)) => {
            let n = image.len();
            let re = g.phase_re.clone().unwrap_or_else(|| vec![1.0; n]);
            let im = g.phase_im.clone().unwrap_or_else(|| vec![0.0; n]);
            if re.len() != n || im.len() != n {
                return Err(Error::Parse(
                    "phase lists must match the image length".into(),
                ));
            }
            let phases = re.iter().zip(&im).map(|(&a, &b)| C64::new(a, b)).collect();
            QcaSystem::monomial(s, g.band, image.clone(), phases)
        }
        _ => Err(Error::Parse(
            "qca_global needs either re/im or image".into(),
        )),
    }
}

fn qca_to_json(q: &QcaSystem) -> SystemFile {
    let s = q.structure();
    let (n, dims) = (s.cells(), s.dims().to_vec());
    match q.repr() {
        QcaRepr::Circuit(layers) => SystemFile::QcaCircuit(QcaCircuitJson {
            n,
            dims,
            layers: layers
                .iter()
                .map(|l| match l {
                    QcaLayer::Partition(gates) => QcaLayerJson::Partition {
                        blocks: gates
                            .iter()
                            .map(|g| CellBlockJson {
                                cells: g.cells.clone(),
                                matrix: MatrixJson::from_mat(&g.unitary),
                            })
                            .collect(),
                    },
                    QcaLayer::Shift(k) => QcaLayerJson::Shift { by: *k },
                    QcaLayer::FactorShift { factors, shifts } => QcaLayerJson::FactorShift {
                        factors: factors.clone(),
                        shifts: shifts.clone(),
                    },
                })
                .collect(),
        }),
        QcaRepr::Dense(d) => {
            let m = MatrixJson::from_mat(&d.matrix);
            SystemFile::QcaGlobal(QcaGlobalJson {
                n,
                dims,
                band: d.band,
                re: Some(m.re),
                im: Some(m.im),
                image: None,
                phase_re: None,
                phase_im: None,
            })
        }
        QcaRepr::Monomial(mo) => SystemFile::QcaGlobal(QcaGlobalJson {
            n,
            dims,
            band: mo.band,
            re: None,
            im: None,
            image: Some(mo.image.clone()),
            phase_re: Some(mo.phases.iter().map(|z| z.re).collect()),
            phase_im: Some(mo.phases.iter().map(|z| z.im).collect()),
        }),
    }
}
