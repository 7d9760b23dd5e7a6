//! Euler characteristics of stored triangulations; the ground truth every
//! numerical pipeline is compared against.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplicialComplex {
    vertices: usize,
    /// `simplices[k]` holds the sorted `k`-simplices.
    simplices: Vec<Vec<Vec<usize>>>,
}

pub const CATALOG: [&str; 5] = ["S2", "T2", "B2", "B4", "S4"];

impl SimplicialComplex {
    /// Checks and stores an explicit list of simplices of every dimension.
    pub fn new(vertices: usize, simplices: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        let c = Self { vertices, simplices };
        c.validate()?;
        Ok(c)
    }

    /// Closure of a list of maximal simplices under taking faces.
    pub fn from_facets(vertices: usize, facets: &[Vec<usize>]) -> Result<Self> {
        let mut by_dim: BTreeMap<usize, BTreeSet<Vec<usize>>> = BTreeMap::new();
        for facet in facets {
            let mut f = facet.clone();
            f.sort_unstable();
            let n = f.len();
            if n == 0 || n > 16 {
                return Err(Error::InvalidComplex(format!("facet {facet:?} has unsupported size")));
            }
            for mask in 1u32..(1 << n) {
                let face: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| f[i]).collect();
                by_dim.entry(face.len() - 1).or_default().insert(face);
            }
        }
        let top = by_dim.keys().last().copied().unwrap_or(0);
        let simplices = (0..=top)
            .map(|k| by_dim.remove(&k).unwrap_or_default().into_iter().collect())
            .collect();
        Self::new(vertices, simplices)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn dim(&self) -> usize {
        self.simplices.len().saturating_sub(1)
    }

    /// Number of simplices per dimension.
    pub fn f_vector(&self) -> Vec<usize> {
        self.simplices.iter().map(Vec::len).collect()
    }

    pub fn simplices(&self, k: usize) -> &[Vec<usize>] {
        self.simplices.get(k).map_or(&[], Vec::as_slice)
    }

    pub fn validate(&self) -> Result<()> {
        let mut present: Vec<BTreeSet<&Vec<usize>>> = Vec::with_capacity(self.simplices.len());
        for (k, list) in self.simplices.iter().enumerate() {
            let mut set = BTreeSet::new();
            for s in list {
                if s.len() != k + 1 {
                    return Err(Error::InvalidComplex(format!("{s:?} listed as a {k}-simplex")));
                }
                if s.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::InvalidComplex(format!("{s:?} is not strictly sorted")));
                }
                if s.iter().any(|&v| v >= self.vertices) {
                    return Err(Error::InvalidComplex(format!("{s:?} uses an unknown vertex")));
                }
                if !set.insert(s) {
                    return Err(Error::InvalidComplex(format!("duplicate simplex {s:?}")));
                }
            }
            present.push(set);
        }
        if self.simplices.first().map_or(0, Vec::len) != self.vertices {
            return Err(Error::InvalidComplex("vertex count disagrees with the 0-simplices".into()));
        }
        for k in 1..self.simplices.len() {
            for s in &self.simplices[k] {
                for drop in 0..s.len() {
                    let face: Vec<usize> = s.iter().enumerate().filter(|(i, _)| *i != drop).map(|(_, v)| *v).collect();
                    if !present[k - 1].contains(&face) {
                        return Err(Error::InvalidComplex(format!("face {face:?} of {s:?} is missing")));
                    }
                }
            }
        }
        Ok(())
    }

    /// `Σ (−1)^k · #(k-simplices)`.
    pub fn euler_characteristic(&self) -> i64 {
        self.simplices
            .iter()
            .enumerate()
            .map(|(k, s)| if k % 2 == 0 { s.len() as i64 } else { -(s.len() as i64) })
            .sum()
    }

    /// One round of barycentric subdivision: vertices are the simplices of
    /// `self`, simplices are chains under inclusion.
    pub fn barycentric_subdivision(&self) -> Result<Self> {
        let mut index: BTreeMap<&Vec<usize>, usize> = BTreeMap::new();
        for list in &self.simplices {
            for s in list {
                let next = index.len();
                index.insert(s, next);
            }
        }
        let maximal = self.maximal_simplices();
        let mut facets = Vec::new();
        for m in &maximal {
            for perm in permutations(m) {
                let chain: Vec<usize> = (1..=perm.len())
                    .map(|len| {
                        let mut face = perm[..len].to_vec();
                        face.sort_unstable();
                        index[&face]
                    })
                    .collect();
                facets.push(chain);
            }
        }
        Self::from_facets(index.len(), &facets)
    }

    fn maximal_simplices(&self) -> Vec<Vec<usize>> {
        let mut covered: BTreeSet<Vec<usize>> = BTreeSet::new();
        let mut out = Vec::new();
        for list in self.simplices.iter().rev() {
            for s in list {
                if !covered.contains(s) {
                    out.push(s.clone());
                }
                for drop in 0..s.len() {
                    let mut face = s.clone();
                    face.remove(drop);
                    covered.insert(face);
                }
            }
        }
        out
    }
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

/// Boundary of the cross-polytope in `R^n` (a triangulated `S^{n−1}`);
/// vertex `2i` is `+e_i`, `2i+1` is `−e_i`.
pub fn cross_polytope_boundary(n: usize) -> Result<SimplicialComplex> {
    let facets: Vec<Vec<usize>> = (0..1usize << n)
        .map(|signs| (0..n).map(|i| 2 * i + (signs >> i & 1)).collect())
        .collect();
    SimplicialComplex::from_facets(2 * n, &facets)
}

/// Cone with a new apex over every maximal simplex of `base`.
pub fn cone(base: &SimplicialComplex) -> Result<SimplicialComplex> {
    let apex = base.vertex_count();
    let facets: Vec<Vec<usize>> = base
        .maximal_simplices()
        .into_iter()
        .map(|mut s| {
            s.push(apex);
            s
        })
        .collect();
    SimplicialComplex::from_facets(apex + 1, &facets)
}

/// The 7-vertex torus: triangles `{i, i+1, i+3}` and `{i, i+2, i+3}` mod 7.
pub fn seven_vertex_torus() -> Result<SimplicialComplex> {
    let facets: Vec<Vec<usize>> = (0..7)
        .flat_map(|i| [vec![i, (i + 1) % 7, (i + 3) % 7], vec![i, (i + 2) % 7, (i + 3) % 7]])
        .collect();
    SimplicialComplex::from_facets(7, &facets)
}

pub fn catalog(name: &str) -> Result<SimplicialComplex> {
    match name {
        "S2" => cross_polytope_boundary(3),
        "T2" => seven_vertex_torus(),
        "B2" => SimplicialComplex::from_facets(3, &[vec![0, 1, 2]]),
        "B4" => cone(&cross_polytope_boundary(4)?),
        "S4" => cross_polytope_boundary(5),
        other => Err(Error::UnknownCatalog(other.to_string())),
    }
}

/// `χ` of a catalog entry.
pub fn catalog_chi(name: &str) -> Result<i64> {
    Ok(catalog(name)?.euler_characteristic())
}
