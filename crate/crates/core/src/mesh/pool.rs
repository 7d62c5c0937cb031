use std::collections::HashMap;

use super::V3;

/// Spatially hashed node pool: inserting a position within `tol` of an
/// existing node returns the existing id, so meshes built part-by-part glue
/// into single shared node objects.
pub struct NodePool {
    pub nodes: Vec<V3>,
    grid: HashMap<(i64, i64, i64), Vec<usize>>,
    cell: f64,
    tol: f64,
}

impl NodePool {
    pub fn new(tol: f64) -> Self {
        NodePool { nodes: Vec::new(), grid: HashMap::new(), cell: (tol * 1e4).max(1e-6), tol }
    }

    fn key(&self, p: &V3) -> (i64, i64, i64) {
        (
            (p.x / self.cell).floor() as i64,
            (p.y / self.cell).floor() as i64,
            (p.z / self.cell).floor() as i64,
        )
    }

    pub fn insert(&mut self, p: V3) -> usize {
        let (kx, ky, kz) = self.key(&p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(ids) = self.grid.get(&(kx + dx, ky + dy, kz + dz)) {
                        for &id in ids {
                            if (self.nodes[id] - p).norm() <= self.tol {
                                return id;
                            }
                        }
                    }
                }
            }
        }
        let id = self.nodes.len();
        self.nodes.push(p);
        self.grid.entry((kx, ky, kz)).or_default().push(id);
        id
    }

    /// Lookup without inserting.
    pub fn find(&self, p: &V3) -> Option<usize> {
        let (kx, ky, kz) = self.key(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(ids) = self.grid.get(&(kx + dx, ky + dy, kz + dz)) {
                        for &id in ids {
                            if (self.nodes[id] - *p).norm() <= self.tol {
                                return Some(id);
                            }
                        }
                    }
                }
            }
        }
        None
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dedups_within_tolerance() {
        let mut pool = NodePool::new(1e-10);
        let a = pool.insert(V3::new(0.0, 0.0, 0.0));
        let b = pool.insert(V3::new(0.0, 0.0, 5e-11));
        let c = pool.insert(V3::new(0.0, 0.0, 1e-6));
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(pool.len(), 2);
    }
}
