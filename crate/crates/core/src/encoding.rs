//! Encoded Fermi-Hubbard Hamiltonians on the compact and VC qubit layouts.
//!
//! Sites are numbered in row-major boustrophedon order. Each spin sector holds
//! its vertex qubits first and its ancillas after them; spin up precedes spin
//! down. Rows grow downward.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString, PauliTerm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Encoding {
    Compact,
    #[serde(rename = "vc", alias = "VC")]
    Vc,
}

impl std::str::FromStr for Encoding {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "compact" => Ok(Encoding::Compact),
            "vc" => Ok(Encoding::Vc),
            _ => Err(Error::Parse(format!("unknown encoding '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FermiHubbardSpec {
    #[serde(rename = "L")]
    pub l: usize,
    pub u: f64,
    pub t_hop: f64,
    pub r: f64,
    pub fermion_count: usize,
}

impl FermiHubbardSpec {
    pub fn new(l: usize, u: f64, t_hop: f64, r: f64, fermion_count: usize) -> Result<Self> {
        let s = FermiHubbardSpec {
            l,
            u,
            t_hop,
            r,
            fermion_count,
        };
        s.validate()?;
        Ok(s)
    }

    /// Unit couplings at the bound `r = 1`.
    pub fn unit(l: usize, fermion_count: usize) -> Result<Self> {
        Self::new(l, 1.0, 1.0, 1.0, fermion_count)
    }

    pub fn validate(&self) -> Result<()> {
        if self.l < 2 {
            return Err(Error::Precondition(format!("L = {} < 2", self.l)));
        }
        if !(self.r > 0.0) || self.u.abs() > self.r || self.t_hop.abs() > self.r {
            return Err(Error::Precondition("need |u|, |t_hop| <= r, r > 0".into()));
        }
        if self.fermion_count > 2 * self.l * self.l {
            return Err(Error::Precondition("fermion_count > 2 L^2".into()));
        }
        Ok(())
    }

    pub fn modes(&self) -> usize {
        2 * self.l * self.l
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub fn index(self) -> usize {
        match self {
            Spin::Up => 0,
            Spin::Down => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QubitClass {
    Vertex,
    Face,
    Auxiliary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QubitInfo {
    pub class: QubitClass,
    pub spin: Spin,
    /// Grid position: the site for vertices and auxiliaries, the top-left
    /// corner for faces.
    pub row: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QubitLayout {
    pub encoding: Encoding,
    #[serde(rename = "L")]
    pub l: usize,
    /// `vertex_qubits[spin][r * L + c]`.
    pub vertex_qubits: [Vec<usize>; 2],
    /// Face ancillas `(r, c, qubit)` for compact, per-site auxiliaries for VC.
    pub ancilla_qubits: [Vec<(usize, usize, usize)>; 2],
    pub qubits: Vec<QubitInfo>,
    pub total_qubits: usize,
}

/// Row-major boustrophedon index of site `(r, c)`.
pub fn serpentine_index(l: usize, r: usize, c: usize) -> usize {
    if r % 2 == 0 {
        r * l + c
    } else {
        r * l + (l - 1 - c)
    }
}

/// Checkerboard faces carrying a compact-encoding ancilla.
pub fn ancilla_faces(l: usize) -> Vec<(usize, usize)> {
    let mut faces = Vec::new();
    for r in 0..l - 1 {
        let cols: Vec<usize> = if r % 2 == 0 {
            (0..l - 1).collect()
        } else {
            (0..l - 1).rev().collect()
        };
        for c in cols {
            if (r + c) % 2 == 0 {
                faces.push((r, c));
            }
        }
    }
    faces
}

impl QubitLayout {
    pub fn new(l: usize, encoding: Encoding) -> Self {
        let mut qubits = Vec::new();
        let mut vertex_qubits = [vec![0; l * l], vec![0; l * l]];
        let mut ancilla_qubits = [Vec::new(), Vec::new()];
        let mut sites: Vec<(usize, usize)> = (0..l)
            .flat_map(|r| (0..l).map(move |c| (r, c)))
            .collect();
        sites.sort_by_key(|&(r, c)| serpentine_index(l, r, c));
        for spin in [Spin::Up, Spin::Down] {
            for &(r, c) in &sites {
                vertex_qubits[spin.index()][r * l + c] = qubits.len();
                qubits.push(QubitInfo {
                    class: QubitClass::Vertex,
                    spin,
                    row: r,
                    col: c,
                });
            }
            let (class, anc): (QubitClass, Vec<(usize, usize)>) = match encoding {
                Encoding::Compact => (QubitClass::Face, ancilla_faces(l)),
                Encoding::Vc => (QubitClass::Auxiliary, sites.clone()),
            };
            for (r, c) in anc {
                ancilla_qubits[spin.index()].push((r, c, qubits.len()));
                qubits.push(QubitInfo {
                    class,
                    spin,
                    row: r,
                    col: c,
                });
            }
        }
        let total_qubits = qubits.len();
        QubitLayout {
            encoding,
            l,
            vertex_qubits,
            ancilla_qubits,
            qubits,
            total_qubits,
        }
    }

    pub fn vertex(&self, spin: Spin, r: usize, c: usize) -> usize {
        self.vertex_qubits[spin.index()][r * self.l + c]
    }

    pub fn ancilla_at(&self, spin: Spin, r: usize, c: usize) -> Option<usize> {
        self.ancilla_qubits[spin.index()]
            .iter()
            .find(|&&(ar, ac, _)| ar == r && ac == c)
            .map(|&(_, _, q)| q)
    }

    pub fn class_of(&self, q: usize) -> QubitClass {
        self.qubits[q].class
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TermKind {
    Horizontal { spin: Spin, row: usize, col: usize },
    Vertical { spin: Spin, row: usize, col: usize },
    OnSite { row: usize, col: usize },
    /// Four hopping edges around one ancilla face (three-layer grouping).
    Square { spin: Spin, row: usize, col: usize },
}

/// One local interaction: a sum of Pauli summands on a common qubit set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerTerm {
    pub kind: TermKind,
    pub summands: Vec<PauliTerm>,
    /// Whether all summands commute pairwise.
    pub commuting: bool,
}

impl LayerTerm {
    pub fn support(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self
            .summands
            .iter()
            .flat_map(|t| t.string.support())
            .collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    pub fn max_weight(&self) -> usize {
        self.summands.iter().map(|t| t.weight()).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionLayer {
    pub label: String,
    pub groups: Vec<LayerTerm>,
    /// No two groups share a qubit.
    pub disjoint: bool,
    /// Identity component dropped from the Pauli expansion.
    pub phase_offset: f64,
    pub n_qubits: usize,
}

impl InteractionLayer {
    pub fn terms(&self) -> Vec<PauliTerm> {
        self.groups
            .iter()
            .flat_map(|g| g.summands.iter().cloned())
            .collect()
    }

    pub fn n_terms(&self) -> usize {
        self.groups.iter().map(|g| g.summands.len()).sum()
    }

    pub fn is_onsite(&self) -> bool {
        self.groups
            .iter()
            .all(|g| matches!(g.kind, TermKind::OnSite { .. }))
    }

    pub fn hopping_pairs(&self) -> usize {
        self.groups
            .iter()
            .map(|g| match g.kind {
                TermKind::Horizontal { .. } | TermKind::Vertical { .. } => 1,
                TermKind::Square { .. } => 4,
                TermKind::OnSite { .. } => 0,
            })
            .sum()
    }

    /// Pairwise commutation of every Pauli summand in the layer.
    pub fn all_commute(&self) -> bool {
        let t = self.terms();
        t.iter().enumerate().all(|(i, a)| {
            t[i + 1..]
                .iter()
                .all(|b| a.string.commutes(&b.string).unwrap_or(false))
        })
    }

    pub fn groups_disjoint(&self) -> bool {
        let mut seen = vec![false; self.n_qubits];
        for g in &self.groups {
            for q in g.support() {
                if seen[q] {
                    return false;
                }
                seen[q] = true;
            }
        }
        true
    }
}

fn term(n: usize, ops: &[(usize, Pauli)], coeff: f64) -> PauliTerm {
    PauliTerm {
        string: PauliString::from_sparse(n, ops).expect("qubit in range"),
        coefficient: coeff,
    }
}

fn onsite_layer(spec: &FermiHubbardSpec, layout: &QubitLayout, label: &str) -> InteractionLayer {
    let n = layout.total_qubits;
    let l = spec.l;
    let q = spec.u / 4.0;
    let mut groups = Vec::new();
    for r in 0..l {
        for c in 0..l {
            let up = layout.vertex(Spin::Up, r, c);
            let dn = layout.vertex(Spin::Down, r, c);
            groups.push(LayerTerm {
                kind: TermKind::OnSite { row: r, col: c },
                summands: vec![
                    term(n, &[(up, Pauli::Z)], -q),
                    term(n, &[(dn, Pauli::Z)], -q),
                    term(n, &[(up, Pauli::Z), (dn, Pauli::Z)], q),
                ],
                commuting: true,
            });
        }
    }
    InteractionLayer {
        label: label.into(),
        groups,
        disjoint: true,
        phase_offset: q * (l * l) as f64,
        n_qubits: n,
    }
}

/// Compact horizontal edge `(r,c)-(r,c+1)`: ancilla below if `r+c` even, above otherwise.
fn compact_horizontal(spec: &FermiHubbardSpec, lay: &QubitLayout, s: Spin, r: usize, c: usize) -> LayerTerm {
    let n = lay.total_qubits;
    let (i, j) = (lay.vertex(s, r, c), lay.vertex(s, r, c + 1));
    let face = if (r + c) % 2 == 0 {
        lay.ancilla_at(s, r, c)
    } else if r > 0 {
        lay.ancilla_at(s, r - 1, c)
    } else {
        None
    };
    let h = spec.t_hop / 2.0;
    let summands = match face {
        Some(f) => vec![
            term(n, &[(i, Pauli::X), (j, Pauli::X), (f, Pauli::Y)], h),
            term(n, &[(i, Pauli::Y), (j, Pauli::Y), (f, Pauli::Y)], h),
        ],
        None => vec![
            term(n, &[(i, Pauli::X), (j, Pauli::X)], h),
            term(n, &[(i, Pauli::Y), (j, Pauli::Y)], h),
        ],
    };
    LayerTerm {
        kind: TermKind::Horizontal { spin: s, row: r, col: c },
        summands,
        commuting: true,
    }
}

/// Compact vertical edge `(r,c)-(r+1,c)`: ancilla right (sign +) if `r+c` even,
/// left (sign -) otherwise.
fn compact_vertical(spec: &FermiHubbardSpec, lay: &QubitLayout, s: Spin, r: usize, c: usize) -> LayerTerm {
    let n = lay.total_qubits;
    let (i, j) = (lay.vertex(s, r, c), lay.vertex(s, r + 1, c));
    let (face, sign) = if (r + c) % 2 == 0 {
        (lay.ancilla_at(s, r, c), 1.0)
    } else if c > 0 {
        (lay.ancilla_at(s, r, c - 1), -1.0)
    } else {
        (None, 1.0)
    };
    let h = spec.t_hop / 2.0;
    let summands = match face {
        Some(f) => vec![
            term(n, &[(i, Pauli::X), (j, Pauli::X), (f, Pauli::X)], sign * h),
            term(n, &[(i, Pauli::Y), (j, Pauli::Y), (f, Pauli::X)], sign * h),
        ],
        None => vec![
            term(n, &[(i, Pauli::X), (j, Pauli::X)], h),
            term(n, &[(i, Pauli::Y), (j, Pauli::Y)], h),
        ],
    };
    LayerTerm {
        kind: TermKind::Vertical { spin: s, row: r, col: c },
        summands,
        commuting: true,
    }
}

fn aux(lay: &QubitLayout, s: Spin, r: usize, c: usize) -> usize {
    lay.ancilla_at(s, r, c).expect("VC auxiliary per site")
}

fn vc_horizontal(spec: &FermiHubbardSpec, lay: &QubitLayout, s: Spin, r: usize, c: usize) -> LayerTerm {
    let n = lay.total_qubits;
    let l = spec.l;
    // i precedes j in serpentine order
    let (ci, cj) = if serpentine_index(l, r, c) < serpentine_index(l, r, c + 1) {
        (c, c + 1)
    } else {
        (c + 1, c)
    };
    let (i, ia, j) = (lay.vertex(s, r, ci), aux(lay, s, r, ci), lay.vertex(s, r, cj));
    let h = spec.t_hop / 2.0;
    LayerTerm {
        kind: TermKind::Horizontal { spin: s, row: r, col: c },
        summands: vec![
            term(n, &[(i, Pauli::X), (ia, Pauli::Z), (j, Pauli::X)], h),
            term(n, &[(i, Pauli::Y), (ia, Pauli::Z), (j, Pauli::Y)], h),
        ],
        commuting: true,
    }
}

fn vc_vertical(spec: &FermiHubbardSpec, lay: &QubitLayout, s: Spin, r: usize, c: usize) -> LayerTerm {
    let n = lay.total_qubits;
    let (i, ia) = (lay.vertex(s, r, c), aux(lay, s, r, c));
    let (j, ja) = (lay.vertex(s, r + 1, c), aux(lay, s, r + 1, c));
    let h = spec.t_hop / 2.0;
    LayerTerm {
        kind: TermKind::Vertical { spin: s, row: r, col: c },
        summands: vec![
            term(n, &[(i, Pauli::X), (ia, Pauli::Y), (j, Pauli::Y), (ja, Pauli::X)], h),
            term(n, &[(i, Pauli::Y), (ia, Pauli::Y), (j, Pauli::X), (ja, Pauli::X)], -h),
        ],
        commuting: true,
    }
}

/// Five interaction layers: two horizontal, two vertical, one on-site.
pub fn encode(spec: &FermiHubbardSpec, encoding: Encoding) -> Result<(QubitLayout, Vec<InteractionLayer>)> {
    spec.validate()?;
    let l = spec.l;
    let layout = QubitLayout::new(l, encoding);
    let n = layout.total_qubits;
    let mut hop: Vec<Vec<LayerTerm>> = vec![Vec::new(); 4];
    for s in [Spin::Up, Spin::Down] {
        for r in 0..l {
            for c in 0..l - 1 {
                let (k, t) = match encoding {
                    Encoding::Compact => ((r + c) % 2, compact_horizontal(spec, &layout, s, r, c)),
                    Encoding::Vc => (c % 2, vc_horizontal(spec, &layout, s, r, c)),
                };
                hop[k].push(t);
            }
        }
        for r in 0..l - 1 {
            for c in 0..l {
                let (k, t) = match encoding {
                    Encoding::Compact => ((r + c) % 2, compact_vertical(spec, &layout, s, r, c)),
                    Encoding::Vc => (r % 2, vc_vertical(spec, &layout, s, r, c)),
                };
                hop[2 + k].push(t);
            }
        }
    }
    let mut layers: Vec<InteractionLayer> = hop
        .into_iter()
        .enumerate()
        .map(|(k, groups)| InteractionLayer {
            label: format!("H{}", k + 1),
            groups,
            disjoint: true,
            phase_offset: 0.0,
            n_qubits: n,
        })
        .collect();
    layers.push(onsite_layer(spec, &layout, "H5"));
    Ok((layout, layers))
}

/// Three layers for the compact encoding: on-site, and two sets of disjoint
/// squares (plus stray boundary edges).
pub fn regroup_three_layers(spec: &FermiHubbardSpec, encoding: Encoding) -> Result<(QubitLayout, Vec<InteractionLayer>)> {
    if encoding != Encoding::Compact {
        return Err(Error::Unsupported("three-layer regrouping needs the compact encoding".into()));
    }
    spec.validate()?;
    let l = spec.l;
    let layout = QubitLayout::new(l, encoding);
    let n = layout.total_qubits;
    let mut layers: Vec<Vec<LayerTerm>> = vec![Vec::new(), Vec::new()];
    let mut used = vec![vec![false; n]; 2];
    for s in [Spin::Up, Spin::Down] {
        let mut covered = std::collections::HashSet::new();
        for &(r, c, _) in &layout.ancilla_qubits[s.index()] {
            let k = r % 2;
            let edges = [
                compact_horizontal(spec, &layout, s, r, c),
                compact_horizontal(spec, &layout, s, r + 1, c),
                compact_vertical(spec, &layout, s, r, c),
                compact_vertical(spec, &layout, s, r, c + 1),
            ];
            covered.insert((0, r, c));
            covered.insert((0, r + 1, c));
            covered.insert((1, r, c));
            covered.insert((1, r, c + 1));
            let summands: Vec<PauliTerm> = edges.iter().flat_map(|e| e.summands.clone()).collect();
            let g = LayerTerm {
                kind: TermKind::Square { spin: s, row: r, col: c },
                summands,
                commuting: false,
            };
            for q in g.support() {
                used[k][q] = true;
            }
            layers[k].push(g);
        }
        let mut stray = Vec::new();
        for r in 0..l {
            for c in 0..l - 1 {
                if !covered.contains(&(0, r, c)) {
                    stray.push(compact_horizontal(spec, &layout, s, r, c));
                }
            }
        }
        for r in 0..l - 1 {
            for c in 0..l {
                if !covered.contains(&(1, r, c)) {
                    stray.push(compact_vertical(spec, &layout, s, r, c));
                }
            }
        }
        for e in stray {
            let sup = e.support();
            let k = (0..2)
                .find(|&k| sup.iter().all(|&q| !used[k][q]))
                .ok_or_else(|| Error::Numeric("boundary edge fits in neither layer".into()))?;
            for &q in &sup {
                used[k][q] = true;
            }
            layers[k].push(e);
        }
    }
    let mut out = vec![onsite_layer(spec, &layout, "H0")];
    for (k, groups) in layers.into_iter().enumerate() {
        out.push(InteractionLayer {
            label: format!("H{}", k + 1),
            groups,
            disjoint: true,
            phase_offset: 0.0,
            n_qubits: n,
        });
    }
    Ok((layout, out))
}

/// The four-way split `h = a1 + a2 + b1 + b2` of one square, each part a sum of two
/// anticommuting Pauli summands; `{a1, b2} = {a2, b1} = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareSplit {
    pub a1: Vec<PauliTerm>,
    pub a2: Vec<PauliTerm>,
    pub b1: Vec<PauliTerm>,
    pub b2: Vec<PauliTerm>,
}

/// Split a square group (summand order: top XX,YY; bottom XX,YY; left XX,YY; right XX,YY).
pub fn split_square(g: &LayerTerm) -> Result<SquareSplit> {
    if !matches!(g.kind, TermKind::Square { .. }) || g.summands.len() != 8 {
        return Err(Error::Precondition("not a square group".into()));
    }
    let s = &g.summands;
    Ok(SquareSplit {
        a1: vec![s[0].clone(), s[6].clone()],
        a2: vec![s[5].clone(), s[3].clone()],
        b1: vec![s[1].clone(), s[7].clone()],
        b2: vec![s[4].clone(), s[2].clone()],
    })
}

/// Norm bound of one layer in the `n`-fermion sector.
pub fn lambda_bound(spec: &FermiHubbardSpec, layer: &InteractionLayer) -> f64 {
    let n = spec.fermion_count;
    let modes = spec.modes();
    if layer.is_onsite() {
        spec.u.abs() * (n / 2).min(spec.l * spec.l) as f64
    } else {
        let omega = layer.hopping_pairs();
        spec.t_hop.abs() * n.min(modes - n).min(omega) as f64
    }
}

pub fn lambda_global(spec: &FermiHubbardSpec, layers: &[InteractionLayer]) -> f64 {
    layers
        .iter()
        .map(|l| lambda_bound(spec, l))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExportTerm {
    pub pauli: String,
    pub qubits: Vec<usize>,
    pub coeff: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExportLayer {
    pub label: String,
    pub terms: Vec<ExportTerm>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExportHamiltonian {
    pub encoding: Encoding,
    #[serde(rename = "L")]
    pub l: usize,
    pub ordering: String,
    pub n_qubits: usize,
    pub layers: Vec<ExportLayer>,
}

pub fn export(layout: &QubitLayout, layers: &[InteractionLayer]) -> ExportHamiltonian {
    ExportHamiltonian {
        encoding: layout.encoding,
        l: layout.l,
        ordering: "serpentine row-major; per spin: vertices then ancillas; up then down".into(),
        n_qubits: layout.total_qubits,
        layers: layers
            .iter()
            .map(|ly| ExportLayer {
                label: ly.label.clone(),
                terms: ly
                    .terms()
                    .iter()
                    .map(|t| {
                        let qubits = t.string.support();
                        ExportTerm {
                            pauli: qubits.iter().map(|&q| t.string.get(q).to_char()).collect(),
                            qubits,
                            coeff: t.coefficient,
                        }
                    })
                    .collect(),
            })
            .collect(),
    }
}
