use std::collections::{HashMap, VecDeque};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub from: NodeId,
    pub to: NodeId,
    pub pdr: f64,
}

/// Directed graph of device nodes plus a single controller.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkModel {
    names: Vec<String>,
    controller: NodeId,
    links: Vec<Link>,
    index: HashMap<(NodeId, NodeId), usize>,
}

impl NetworkModel {
    pub fn new(names: Vec<String>, controller: NodeId, links: Vec<Link>) -> Result<Self> {
        if controller >= names.len() {
            return Err(Error::Network(format!("controller {controller} is not a declared node")));
        }
        let mut index = HashMap::new();
        for (i, l) in links.iter().enumerate() {
            if l.from >= names.len() || l.to >= names.len() {
                return Err(Error::Network(format!("link {}->{} uses an undeclared node", l.from, l.to)));
            }
            if l.from == l.to {
                return Err(Error::Network(format!("self loop on node {}", l.from)));
            }
            if !(l.pdr > 0.0 && l.pdr <= 1.0) {
                return Err(Error::Network(format!("link {}->{} pdr {} outside (0,1]", l.from, l.to, l.pdr)));
            }
            if index.insert((l.from, l.to), i).is_some() {
                return Err(Error::Network(format!("duplicate link {}->{}", l.from, l.to)));
            }
        }
        let mut seen = HashMap::new();
        for (i, n) in names.iter().enumerate() {
            if seen.insert(n.as_str(), i).is_some() {
                return Err(Error::Network(format!("duplicate node name {n}")));
            }
        }
        Ok(Self { names, controller, links, index })
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn controller(&self) -> NodeId {
        self.controller
    }

    pub fn name(&self, id: NodeId) -> &str {
        &self.names[id]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn node_by_name(&self, name: &str) -> Option<NodeId> {
        self.names.iter().position(|n| n == name)
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link_index(&self, from: NodeId, to: NodeId) -> Option<usize> {
        self.index.get(&(from, to)).copied()
    }

    pub fn link(&self, from: NodeId, to: NodeId) -> Option<&Link> {
        self.link_index(from, to).map(|i| &self.links[i])
    }

    /// Per-hop link PDRs along a node path.
    pub fn path_pdrs(&self, path: &[NodeId]) -> Result<Vec<f64>> {
        path.windows(2)
            .map(|w| {
                self.link(w[0], w[1])
                    .map(|l| l.pdr)
                    .ok_or(Error::MissingLink { from: w[0], to: w[1] })
            })
            .collect()
    }

    pub fn path_links(&self, path: &[NodeId]) -> Result<Vec<usize>> {
        path.windows(2)
            .map(|w| self.link_index(w[0], w[1]).ok_or(Error::MissingLink { from: w[0], to: w[1] }))
            .collect()
    }

    fn successors(&self) -> Vec<Vec<NodeId>> {
        let mut out = vec![Vec::new(); self.names.len()];
        for l in &self.links {
            out[l.from].push(l.to);
        }
        for s in &mut out {
            s.sort_unstable();
        }
        out
    }

    /// BFS parent tree from `src`; `None` for unreachable nodes. Ties go to the lower node id.
    pub fn bfs_from(&self, src: NodeId) -> Vec<Option<(usize, NodeId)>> {
        let succ = self.successors();
        let mut dist: Vec<Option<(usize, NodeId)>> = vec![None; self.names.len()];
        dist[src] = Some((0, src));
        let mut q = VecDeque::from([src]);
        while let Some(u) = q.pop_front() {
            let d = dist[u].map(|x| x.0).unwrap_or(0);
            for &v in &succ[u] {
                if dist[v].is_none() {
                    dist[v] = Some((d + 1, u));
                    q.push_back(v);
                }
            }
        }
        dist
    }

    /// Shortest path `src -> dst` as a node list, or `None` if unreachable.
    pub fn shortest_path(&self, src: NodeId, dst: NodeId) -> Option<Vec<NodeId>> {
        let tree = self.bfs_from(src);
        tree[dst]?;
        let mut path = vec![dst];
        let mut cur = dst;
        while cur != src {
            cur = tree[cur]?.1;
            path.push(cur);
        }
        path.reverse();
        Some(path)
    }

    /// Largest hop distance from the controller to any reachable node.
    pub fn radius(&self) -> usize {
        self.bfs_from(self.controller)
            .iter()
            .flatten()
            .map(|d| d.0)
            .max()
            .unwrap_or(0)
    }

    /// `w x h` grid with bidirectional links and the controller in the middle.
    pub fn grid(w: usize, h: usize, pdr: f64) -> Result<Self> {
        Self::grid_with(w, h, |_, _| pdr)
    }

    /// Grid whose link PDRs are drawn uniformly from `[lo, hi]`.
    pub fn random_grid(w: usize, h: usize, lo: f64, hi: f64, seed: u64) -> Result<Self> {
        if !(lo > 0.0 && lo <= hi && hi <= 1.0) {
            return Err(Error::Network(format!("bad pdr range [{lo}, {hi}]")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::grid_with(w, h, |_, _| if lo == hi { lo } else { rng.gen_range(lo..=hi) })
    }

    fn grid_with(w: usize, h: usize, mut pdr: impl FnMut(NodeId, NodeId) -> f64) -> Result<Self> {
        if w == 0 || h == 0 || w * h < 3 {
            return Err(Error::Network("grid needs at least three nodes".into()));
        }
        let ctrl = (h / 2) * w + w / 2;
        let names = (0..w * h)
            .map(|i| if i == ctrl { "Vc".to_string() } else { format!("V{i}") })
            .collect();
        let mut links = Vec::new();
        for y in 0..h {
            for x in 0..w {
                let u = y * w + x;
                let mut nb = Vec::new();
                if x + 1 < w {
                    nb.push(u + 1);
                }
                if y + 1 < h {
                    nb.push(u + w);
                }
                for v in nb {
                    links.push(Link { from: u, to: v, pdr: pdr(u, v) });
                    links.push(Link { from: v, to: u, pdr: pdr(v, u) });
                }
            }
        }
        Self::new(names, ctrl, links)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_pdr() {
        let names = vec!["a".into(), "b".into()];
        let err = NetworkModel::new(names, 0, vec![Link { from: 0, to: 1, pdr: 0.0 }]).unwrap_err();
        assert!(matches!(err, Error::Network(_)));
    }

    #[test]
    fn rejects_undeclared_endpoint() {
        let names = vec!["a".into(), "b".into()];
        assert!(NetworkModel::new(names, 0, vec![Link { from: 0, to: 2, pdr: 1.0 }]).is_err());
    }

    #[test]
    fn grid_radius_and_paths() {
        let g = NetworkModel::grid(9, 9, 1.0).unwrap();
        assert_eq!(g.name(g.controller()), "Vc");
        assert_eq!(g.radius(), 8);
        let p = g.shortest_path(0, g.controller()).unwrap();
        assert_eq!(p.len(), 9);
        assert_eq!(g.path_pdrs(&p).unwrap(), vec![1.0; 8]);
    }

    #[test]
    fn random_grid_is_seeded() {
        let a = NetworkModel::random_grid(4, 4, 0.8, 1.0, 7).unwrap();
        let b = NetworkModel::random_grid(4, 4, 0.8, 1.0, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.links().iter().all(|l| l.pdr >= 0.8 && l.pdr <= 1.0));
    }
}
