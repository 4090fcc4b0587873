//! The Peres configuration: 33 rays with components in {0, ±1, ±√2} and the
//! 40 orthogonal bases they determine.

use std::sync::OnceLock;

use serde::Serialize;

use crate::exactgeom::q2::Q2;
use crate::exactgeom::vec3::Ray;

/// Component pattern of a catalogue ray, up to permutation and sign.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// `(0,0,1)`
    Axis,
    /// `(0,1,±1)`
    FaceDiagonal,
    /// `(0,1,±√2)`
    FaceSqrt2,
    /// `(1,±1,±√2)`
    Body,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Axis, Family::FaceDiagonal, Family::FaceSqrt2, Family::Body];

    /// Seed component patterns, as `(integer, √2 coefficient)` pairs.
    fn seeds(self) -> Vec<[(i64, i64); 3]> {
        match self {
            Family::Axis => vec![[(0, 0), (0, 0), (1, 0)]],
            Family::FaceDiagonal => vec![[(0, 0), (1, 0), (1, 0)], [(0, 0), (1, 0), (-1, 0)]],
            Family::FaceSqrt2 => vec![[(0, 0), (1, 0), (0, 1)], [(0, 0), (1, 0), (0, -1)]],
            Family::Body => vec![
                [(1, 0), (1, 0), (0, 1)],
                [(1, 0), (-1, 0), (0, 1)],
                [(1, 0), (1, 0), (0, -1)],
                [(1, 0), (-1, 0), (0, -1)],
            ],
        }
    }

    /// All distinct rays of this family in canonical order.
    pub fn rays(self) -> Vec<Ray> {
        const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let mut out: Vec<Ray> = Vec::new();
        for seed in self.seeds() {
            for perm in PERMS {
                let ray = Ray::from_parts(perm.map(|i| seed[i]));
                if !out.contains(&ray) {
                    out.push(ray);
                }
            }
        }
        out.sort_by(Ray::cmp_canonical);
        out
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisKind {
    /// All three members are catalogue rays.
    Internal,
    /// Two members are catalogue rays; the third is their cross product.
    Completed,
}

/// An ordered orthogonal triple `(x, y, z)`.
#[derive(Clone, Debug)]
pub struct Basis {
    pub x: Ray,
    pub y: Ray,
    pub z: Ray,
    pub kind: BasisKind,
    /// Catalogue index of each member, `None` for a completing ray.
    pub members: [Option<usize>; 3],
}

impl Basis {
    pub fn rays(&self) -> [&Ray; 3] {
        [&self.x, &self.y, &self.z]
    }

    /// Position (0 for x, 1 for y, 2 for z) of catalogue ray `ray_index`.
    pub fn position_of(&self, ray_index: usize) -> Option<usize> {
        self.members.iter().position(|m| *m == Some(ray_index))
    }

    pub fn is_orthogonal(&self) -> bool {
        self.x.is_orthogonal(&self.y) && self.y.is_orthogonal(&self.z) && self.z.is_orthogonal(&self.x)
    }

    /// Catalogue indices of the members that belong to the catalogue.
    pub fn catalogue_members(&self) -> Vec<usize> {
        self.members.iter().flatten().copied().collect()
    }
}

impl Serialize for Basis {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Basis", 4)?;
        st.serialize_field("x", &self.x)?;
        st.serialize_field("y", &self.y)?;
        st.serialize_field("z", &self.z)?;
        st.serialize_field("kind", &self.kind)?;
        st.end()
    }
}

/// The 33 Peres rays, grouped by family in the order of [`Family::ALL`].
pub fn peres_rays() -> Vec<Ray> {
    Family::ALL.into_iter().flat_map(Family::rays).collect()
}

/// Index of `ray` in `rays`, by ray equality.
pub fn ray_index(rays: &[Ray], ray: &Ray) -> Option<usize> {
    rays.iter().position(|r| r == ray)
}

/// All unordered orthogonal pairs `(i, j)` with `i < j`.
pub fn orthogonal_pairs(rays: &[Ray]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..rays.len() {
        for j in i + 1..rays.len() {
            if rays[i].is_orthogonal(&rays[j]) {
                out.push((i, j));
            }
        }
    }
    out
}

fn ordered_basis(members: Vec<(Ray, Option<usize>)>, kind: BasisKind) -> Basis {
    let mut members = members;
    members.sort_by(|l, r| l.0.cmp_canonical(&r.0));
    let idx = [members[0].1, members[1].1, members[2].1];
    let mut it = members.into_iter().map(|(r, _)| r);
    let (x, y, z) = (it.next().unwrap(), it.next().unwrap(), it.next().unwrap());
    Basis { x, y, z, kind, members: idx }
}

/// Internal bases (orthogonal triples inside the catalogue) followed by
/// completed bases (orthogonal pairs with no third catalogue ray, closed by
/// their cross product).
///
/// Internal bases are listed by ascending member-index triple and completed
/// ones by ascending pair; members within a basis follow
/// [`Ray::cmp_canonical`].
pub fn enumerate_bases(rays: &[Ray]) -> Vec<Basis> {
    let pairs = orthogonal_pairs(rays);
    let orth = |i: usize, j: usize| rays[i].is_orthogonal(&rays[j]);
    let mut internal = Vec::new();
    let mut completed = Vec::new();
    for &(i, j) in &pairs {
        let thirds: Vec<usize> = (0..rays.len()).filter(|&k| k != i && k != j && orth(i, k) && orth(j, k)).collect();
        if thirds.is_empty() {
            let c = rays[i].rep().cross(rays[j].rep()).expect("orthogonal rays are independent");
            let third = Ray::new(c).expect("nonzero cross product");
            completed.push(ordered_basis(
                vec![(rays[i].clone(), Some(i)), (rays[j].clone(), Some(j)), (third, None)],
                BasisKind::Completed,
            ));
        } else {
            for k in thirds.into_iter().filter(|&k| k > j) {
                internal.push(ordered_basis(
                    vec![(rays[i].clone(), Some(i)), (rays[j].clone(), Some(j)), (rays[k].clone(), Some(k))],
                    BasisKind::Internal,
                ));
            }
        }
    }
    internal.extend(completed);
    internal
}

/// The fixed Peres catalogue, built once.
#[derive(Debug)]
pub struct Catalogue {
    pub rays: Vec<Ray>,
    pub bases: Vec<Basis>,
    /// `overlaps[a][b]` holds the squared overlaps of ray `b` with the members
    /// `x, y, z` of basis `a`.
    overlaps: Vec<Vec<[Q2; 3]>>,
    /// `matching[a][b]`: position of ray `b` among the members of basis `a`.
    matching: Vec<Vec<Option<usize>>>,
}

impl Catalogue {
    pub fn build() -> Catalogue {
        let rays = peres_rays();
        let bases = enumerate_bases(&rays);
        let overlaps = bases
            .iter()
            .map(|basis| {
                rays.iter()
                    .map(|w| basis.rays().map(|m| w.squared_overlap(m)))
                    .collect()
            })
            .collect();
        let matching = bases
            .iter()
            .map(|basis| rays.iter().map(|w| basis.rays().iter().position(|m| *m == w)).collect())
            .collect();
        Catalogue { rays, bases, overlaps, matching }
    }

    /// Shared instance.
    pub fn peres() -> &'static Catalogue {
        static CATALOGUE: OnceLock<Catalogue> = OnceLock::new();
        CATALOGUE.get_or_init(Catalogue::build)
    }

    pub fn num_rays(&self) -> usize {
        self.rays.len()
    }

    pub fn num_bases(&self) -> usize {
        self.bases.len()
    }

    /// Squared overlaps `((w·x)², (w·y)², (w·z)²)` with unit-normalized vectors.
    pub fn overlaps(&self, basis: usize, ray: usize) -> &[Q2; 3] {
        &self.overlaps[basis][ray]
    }

    /// Which member of basis `basis` equals ray `ray`, by exact ray
    /// equality.
    pub fn matching_position(&self, basis: usize, ray: usize) -> Option<usize> {
        self.matching[basis][ray]
    }

    pub fn basis_index_of(&self, members: [&Ray; 3]) -> Option<usize> {
        self.bases.iter().position(|b| b.x == *members[0] && b.y == *members[1] && b.z == *members[2])
    }

    pub fn ray_index(&self, ray: &Ray) -> Option<usize> {
        ray_index(&self.rays, ray)
    }

    /// Structured export of rays and bases.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "rays": self.rays,
            "bases": self.bases,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactgeom::vec3::Vec3;

    fn r(parts: [(i64, i64); 3]) -> Ray {
        Ray::from_parts(parts)
    }

    #[test]
    fn family_sizes() {
        let sizes: Vec<usize> = Family::ALL.iter().map(|f| f.rays().len()).collect();
        assert_eq!(sizes, vec![3, 6, 12, 12]);
        let rays = peres_rays();
        assert_eq!(rays.len(), 33);
        for i in 0..rays.len() {
            for j in i + 1..rays.len() {
                assert_ne!(rays[i], rays[j], "rays {i} and {j} coincide");
            }
        }
    }

    #[test]
    fn contains_axis_once() {
        let rays = peres_rays();
        let z = r([(0, 0), (0, 0), (1, 0)]);
        let zneg = r([(0, 0), (0, 0), (-1, 0)]);
        assert_eq!(rays.iter().filter(|x| **x == z).count(), 1);
        assert_eq!(ray_index(&rays, &zneg), ray_index(&rays, &z));
        assert_eq!(rays[0], r([(1, 0), (0, 0), (0, 0)]));
        assert_eq!(rays[1], r([(0, 0), (1, 0), (0, 0)]));
        assert_eq!(rays[2], r([(0, 0), (0, 0), (1, 0)]));
    }

    #[test]
    fn basis_counts_and_identity() {
        let cat = Catalogue::build();
        let internal = cat.bases.iter().filter(|b| b.kind == BasisKind::Internal).count();
        assert_eq!(internal, 16);
        assert_eq!(cat.num_bases() - internal, 24);
        let id = &cat.bases[0];
        assert_eq!(id.kind, BasisKind::Internal);
        assert_eq!(id.members, [Some(0), Some(1), Some(2)]);
        assert!(cat.bases.iter().all(Basis::is_orthogonal));
    }

    #[test]
    fn completed_basis_example() {
        let cat = Catalogue::build();
        let u = r([(0, 0), (1, 0), (0, 1)]);
        let w = r([(1, 0), (0, 1), (-1, 0)]);
        let third = r([(3, 0), (0, -1), (1, 0)]);
        let found = cat.bases.iter().find(|b| {
            let rs = b.rays();
            rs.contains(&&u) && rs.contains(&&w)
        });
        let b = found.expect("pair is in a basis");
        assert_eq!(b.kind, BasisKind::Completed);
        assert!(b.rays().contains(&&third));
        let completing = b.rays().into_iter().zip(b.members).find(|(_, m)| m.is_none()).unwrap().0;
        assert_eq!(completing.rep(), &Vec3::from_parts([(3, 0), (0, -1), (1, 0)]));
    }

    #[test]
    fn orthogonal_pair_examples() {
        let rays = peres_rays();
        let pairs = orthogonal_pairs(&rays);
        let has = |u: Ray, v: Ray| {
            let (i, j) = (ray_index(&rays, &u).unwrap(), ray_index(&rays, &v).unwrap());
            pairs.contains(&(i.min(j), i.max(j)))
        };
        assert!(has(r([(1, 0), (1, 0), (0, 1)]), r([(1, 0), (1, 0), (0, -1)])));
        assert!(has(r([(1, 0), (0, 0), (0, 0)]), r([(0, 0), (0, 0), (1, 0)])));
        assert!(!has(r([(1, 0), (1, 0), (0, 0)]), r([(0, 0), (1, 0), (1, 0)])));
        assert_eq!(pairs.len(), 72);
    }

    #[test]
    fn no_duplicate_bases() {
        let cat = Catalogue::build();
        for i in 0..cat.bases.len() {
            for j in i + 1..cat.bases.len() {
                let bi = cat.bases[i].rays();
                let same = cat.bases[j].rays().iter().all(|m| bi.contains(m));
                assert!(!same, "bases {i} and {j} coincide");
            }
        }
    }

    #[test]
    fn overlap_completeness() {
        let cat = Catalogue::peres();
        for a in 0..cat.num_bases() {
            for b in 0..cat.num_rays() {
                let s: Q2 = cat.overlaps(a, b).iter().sum();
                assert_eq!(s, Q2::one(), "basis {a}, ray {b}");
            }
        }
    }

    #[test]
    fn json_export_uses_q2_strings() {
        let cat = Catalogue::build();
        let j = cat.to_json();
        assert_eq!(j["rays"].as_array().unwrap().len(), 33);
        assert_eq!(j["bases"].as_array().unwrap().len(), 40);
        assert_eq!(j["rays"][0], serde_json::json!(["1", "0", "0"]));
        assert_eq!(j["bases"][0]["kind"], "internal");
        assert_eq!(j["bases"][39]["kind"], "completed");
    }

    #[test]
    fn matching_table_agrees_with_member_indices() {
        let cat = Catalogue::peres();
        let mut count = 0;
        for a in 0..cat.num_bases() {
            for b in 0..cat.num_rays() {
                assert_eq!(cat.matching_position(a, b), cat.bases[a].position_of(b));
                count += cat.matching_position(a, b).is_some() as usize;
            }
        }
        assert_eq!(count, 16 * 3 + 24 * 2);
    }
}
