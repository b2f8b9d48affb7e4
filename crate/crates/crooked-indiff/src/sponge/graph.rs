//! The graph simulator for the sponge and its crooked wrapper.
//!
//! The classical simulator records one edge per answered query and keeps a
//! capacity-exclusion list `L` so that every response carries a fresh
//! capacity; marked capacity classes are exactly the states reachable from
//! the root by recorded absorption steps. A full-length path triggers
//! oracle programming: the squeeze chain is laid down with rate parts
//! forced to the digest blocks.
//!
//! The crooked wrapper runs the subverted implementation on marked
//! queries, feeds its internal queries from the classical simulator, and
//! flags `bad` (answering bottom) when the implementation deviates.

use crate::bits::BitStr;
use crate::error::{Error, Result};
use crate::oracle::{FunctionTable, Point, QueryService, Transcript};
use crate::rng::SplitRng;
use crate::subversion::Implementation;
use std::collections::{BTreeMap, BTreeSet};

use super::{Node, SpongeParams};

pub struct SpongeSimGraph {
    params: SpongeParams,
    edges: BTreeMap<Node, Node>,
    marked_caps: BTreeSet<BitStr>,
    /// Capacity-exclusion list L.
    excluded: BTreeSet<BitStr>,
}

impl SpongeSimGraph {
    /// Stage-two graph: the root's capacity class is marked, and `L` is
    /// seeded with the root capacity plus the capacity parts of all
    /// first-stage query inputs.
    pub fn new(params: SpongeParams, advice: &Transcript) -> Self {
        let mut excluded = BTreeSet::new();
        let mut marked_caps = BTreeSet::new();
        excluded.insert(params.iv.cap);
        marked_caps.insert(params.iv.cap);
        for e in advice.iter() {
            let node = Node::from_word(e.point.x, params.cap);
            excluded.insert(node.cap);
        }
        SpongeSimGraph {
            params,
            edges: BTreeMap::new(),
            marked_caps,
            excluded,
        }
    }

    pub fn params(&self) -> &SpongeParams {
        &self.params
    }

    pub fn root(&self) -> Node {
        self.params.iv
    }

    pub fn edge(&self, x: Node) -> Option<Node> {
        self.edges.get(&x).copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn excluded_len(&self) -> usize {
        self.excluded.len()
    }

    pub fn is_marked(&self, x: Node) -> bool {
        self.marked_caps.contains(&x.cap)
    }

    /// Every edge target must carry a distinct capacity.
    pub fn capacities_unique(&self) -> bool {
        let caps: BTreeSet<BitStr> = self.edges.values().map(|y| y.cap).collect();
        caps.len() == self.edges.len()
    }

    /// Sample a response node: fresh capacity outside `L`, uniform rate.
    pub fn newnode(&mut self, rng: &mut SplitRng) -> Result<Node> {
        if self.excluded.len() >= BitStr::domain_size(self.params.cap) as usize {
            return Err(Error::Saturated(
                "capacity-exclusion list covers the whole space".into(),
            ));
        }
        let cap = loop {
            let c = BitStr::masked(rng.next_u64(), self.params.cap);
            if !self.excluded.contains(&c) {
                break c;
            }
        };
        self.excluded.insert(cap);
        let rate = BitStr::masked(rng.next_u64(), self.params.rate);
        Ok(Node::new(rate, cap))
    }

    /// Message blocks whose absorption from the root reaches `x` as the
    /// next query input. The root itself is the empty message.
    pub fn findpath(&self, x: Node) -> Result<Vec<BitStr>> {
        if x == self.root() {
            return Ok(Vec::new());
        }
        let mut blocks = Vec::new();
        let mut cursor = x;
        let limit = self.params.absorb_blocks() as usize + 2;
        loop {
            if blocks.len() > limit {
                return Err(Error::Graph("path longer than any message".into()));
            }
            if cursor.cap == self.root().cap {
                blocks.push(cursor.rate ^ self.root().rate);
                break;
            }
            let Some((source, target)) = self
                .edges
                .iter()
                .find(|(s, t)| t.cap == cursor.cap && self.is_marked(**s))
                .map(|(s, t)| (*s, *t))
            else {
                return Err(Error::Graph(format!(
                    "no marked predecessor for {cursor:?}"
                )));
            };
            blocks.push(cursor.rate ^ target.rate);
            cursor = source;
        }
        blocks.reverse();
        Ok(blocks)
    }

    fn assemble(&self, blocks: &[BitStr]) -> BitStr {
        let mut it = blocks.iter();
        let first = *it.next().expect("full-length path is nonempty");
        it.fold(first, |acc, b| acc.concat(*b))
    }

    /// The classical simulator step: cached edges are replayed; unmarked
    /// queries get fresh nodes; marked queries extend the path, and a
    /// full-length path programs the oracle's digest into the squeeze
    /// chain.
    pub fn sim_query(
        &mut self,
        x: Node,
        oracle: &FunctionTable,
        rng: &mut SplitRng,
    ) -> Result<Node> {
        if let Some(y) = self.edge(x) {
            return Ok(y);
        }
        self.excluded.insert(x.cap);
        if self.is_marked(x) {
            let blocks = self.findpath(x)?;
            if blocks.len() < self.params.absorb_blocks() as usize {
                let y = self.newnode(rng)?;
                self.edges.insert(x, y);
                self.marked_caps.insert(y.cap);
                Ok(y)
            } else {
                let msg = self.assemble(&blocks);
                let digest = oracle.peek(Point::new(0, msg))?;
                let mut prev = x;
                let mut first = None;
                for i in 0..self.params.squeeze_blocks() {
                    let rate = digest.slice_from_top(i * self.params.rate, self.params.rate);
                    if self.excluded.len() >= BitStr::domain_size(self.params.cap) as usize {
                        return Err(Error::Saturated(
                            "capacity-exclusion list covers the whole space".into(),
                        ));
                    }
                    let cap = loop {
                        let c = BitStr::masked(rng.next_u64(), self.params.cap);
                        if !self.excluded.contains(&c) {
                            break c;
                        }
                    };
                    self.excluded.insert(cap);
                    let y = Node::new(rate, cap);
                    self.edges.insert(prev, y);
                    if first.is_none() {
                        first = Some(y);
                    }
                    prev = y;
                }
                Ok(first.expect("at least one squeeze block"))
            }
        } else {
            let y = self.newnode(rng)?;
            self.edges.insert(x, y);
            Ok(y)
        }
    }

    /// JSON snapshot: edges, marked capacity classes, exclusion list.
    pub fn snapshot_json(&self) -> String {
        let mut out = String::from("{\"edges\":[");
        for (i, (s, t)) in self.edges.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format!(
                "{{\"from\":\"{}\",\"to\":\"{}\"}}",
                s.to_word().hex(),
                t.to_word().hex()
            ));
        }
        out.push_str("],\"marked_caps\":[");
        for (i, c) in self.marked_caps.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format!("\"{}\"", c.hex()));
        }
        out.push_str("],\"excluded\":[");
        for (i, c) in self.excluded.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format!("\"{}\"", c.hex()));
        }
        out.push_str("]}");
        out
    }
}

/// The crooked wrapper: marked queries run the subverted implementation
/// against the classical simulator; a deviation sets `bad` and the answer
/// becomes bottom (`None`).
pub struct CrookedSpongeSim {
    graph: SpongeSimGraph,
    imp: Implementation,
    oracle: FunctionTable,
    rng: SplitRng,
    pub bad: bool,
    pub impl_calls: u32,
}

struct GraphService<'a> {
    graph: &'a mut SpongeSimGraph,
    oracle: &'a FunctionTable,
    rng: &'a mut SplitRng,
}

impl QueryService for GraphService<'_> {
    fn fetch(&mut self, p: Point) -> Result<BitStr> {
        let node = Node::from_word(p.x, self.graph.params.cap);
        Ok(self
            .graph
            .sim_query(node, self.oracle, self.rng)?
            .to_word())
    }
}

impl CrookedSpongeSim {
    pub fn new(
        params: SpongeParams,
        imp: Implementation,
        oracle: FunctionTable,
        rng: SplitRng,
    ) -> Self {
        let advice = imp.advice().clone();
        CrookedSpongeSim {
            graph: SpongeSimGraph::new(params, &advice),
            imp,
            oracle,
            rng,
            bad: false,
            impl_calls: 0,
        }
    }

    pub fn graph(&self) -> &SpongeSimGraph {
        &self.graph
    }

    /// One simulator answer; `None` is the distinguished bottom answer.
    pub fn query(&mut self, x: Node) -> Result<Option<Node>> {
        if let Some(y) = self.graph.edge(x) {
            return Ok(Some(y));
        }
        if self.graph.is_marked(x) {
            let mut svc = GraphService {
                graph: &mut self.graph,
                oracle: &self.oracle,
                rng: &mut self.rng,
            };
            let rec = self.imp.evaluate(&mut svc, x.point())?;
            self.impl_calls += 1;
            let honest = self.graph.sim_query(x, &self.oracle, &mut self.rng)?;
            if rec.value != honest.to_word() {
                self.bad = true;
                return Ok(None);
            }
            Ok(Some(honest))
        } else {
            Ok(Some(self.graph.sim_query(x, &self.oracle, &mut self.rng)?))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subversion::SubverterKind;

    fn graph(seed: u64, r: u8, c: u8, ell: u8, s: u8) -> (SpongeSimGraph, FunctionTable, SplitRng) {
        let mut rng = SplitRng::from_path(seed, &[0x6976]);
        let params = SpongeParams::sample_iv(r, c, ell, s, &mut rng).unwrap();
        let oracle = FunctionTable::new(seed, 0x46, ell, 0, s).unwrap();
        (
            SpongeSimGraph::new(params, &Transcript::new()),
            oracle,
            SplitRng::from_path(seed, &[0x6e6e]),
        )
    }

    #[test]
    fn newnode_avoids_excluded_capacities() {
        let (mut g, _, mut rng) = graph(1, 4, 1, 4, 4);
        // c = 1: the root capacity is excluded, so the other value is forced
        let forced = g.newnode(&mut rng).unwrap();
        assert_eq!(forced.cap, g.root().cap.flip_low_bit());
        assert!(matches!(g.newnode(&mut rng), Err(Error::Saturated(_))));
    }

    #[test]
    fn newnode_grows_the_exclusion_list() {
        let (mut g, _, mut rng) = graph(2, 4, 6, 4, 4);
        let before = g.excluded_len();
        for k in 1..=10 {
            g.newnode(&mut rng).unwrap();
            assert_eq!(g.excluded_len(), before + k);
        }
    }

    #[test]
    fn saturation_at_two_capacity_bits() {
        let (mut g, _, mut rng) = graph(3, 4, 2, 4, 4);
        for _ in 0..3 {
            g.newnode(&mut rng).unwrap();
        }
        assert_eq!(g.excluded_len(), 4);
        assert!(matches!(g.newnode(&mut rng), Err(Error::Saturated(_))));
    }

    #[test]
    fn findpath_of_root_is_empty() {
        let (g, _, _) = graph(4, 4, 4, 8, 4);
        assert!(g.findpath(g.root()).unwrap().is_empty());
    }

    #[test]
    fn findpath_replays_two_edge_walk() {
        // hand-built walk at r = c = 2
        let (mut g, oracle, mut rng) = graph(5, 2, 2, 8, 2);
        let m1 = BitStr::new(0b01, 2).unwrap();
        let input1 = Node::new(g.root().rate ^ m1, g.root().cap);
        let y = g.sim_query(input1, &oracle, &mut rng).unwrap();
        assert!(g.is_marked(Node::new(BitStr::zero(2), y.cap)));
        let m2 = BitStr::new(0b10, 2).unwrap();
        let input2 = Node::new(y.rate ^ m2, y.cap);
        assert_eq!(g.findpath(input2).unwrap(), vec![m1, m2]);
    }

    #[test]
    fn unreachable_marked_node_is_a_graph_error() {
        let (mut g, _, _) = graph(6, 4, 4, 8, 4);
        // mark a capacity class by hand without laying any edge
        let stray = g.root().cap.flip_low_bit();
        g.marked_caps.insert(stray);
        let node = Node::new(BitStr::zero(4), stray);
        assert!(matches!(g.findpath(node), Err(Error::Graph(_))));
    }

    #[test]
    fn fresh_unmarked_query_records_an_edge() {
        let (mut g, oracle, mut rng) = graph(7, 4, 4, 8, 4);
        let x = Node::new(BitStr::new(0x3, 4).unwrap(), g.root().cap.flip_low_bit());
        assert!(!g.is_marked(x));
        let y = g.sim_query(x, &oracle, &mut rng).unwrap();
        assert_eq!(g.edge(x), Some(y));
        assert_eq!(g.sim_query(x, &oracle, &mut rng).unwrap(), y);
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn full_length_path_programs_the_oracle() {
        // ell = r: one absorb block reaches full length immediately
        let (mut g, oracle, mut rng) = graph(8, 4, 8, 4, 8);
        let m = BitStr::new(0x6, 4).unwrap();
        let input = Node::new(g.root().rate ^ m, g.root().cap);
        let y = g.sim_query(input, &oracle, &mut rng).unwrap();
        let digest = oracle.peek(Point::new(0, m)).unwrap();
        assert_eq!(y.rate, digest.slice_from_top(0, 4));
        // squeeze step replays the recorded chain
        let y2 = g.sim_query(y, &oracle, &mut rng).unwrap();
        assert_eq!(y2.rate, digest.slice_from_top(4, 4));
    }

    #[test]
    fn mark_propagation_covers_the_capacity_class() {
        let (mut g, oracle, mut rng) = graph(9, 4, 4, 8, 4);
        let input = Node::new(g.root().rate ^ BitStr::new(0x2, 4).unwrap(), g.root().cap);
        let y = g.sim_query(input, &oracle, &mut rng).unwrap();
        let marked = BitStr::enumerate(4)
            .filter(|&w| g.is_marked(Node::new(w, y.cap)))
            .count();
        assert_eq!(marked, 16);
    }

    #[test]
    fn capacities_stay_unique_under_load() {
        let (mut g, oracle, mut rng) = graph(10, 3, 9, 9, 6);
        let mut probe = SplitRng::new(42);
        for _ in 0..40 {
            let x = Node::new(
                BitStr::masked(probe.next_u64(), 3),
                BitStr::masked(probe.next_u64(), 9),
            );
            let _ = g.sim_query(x, &oracle, &mut rng).unwrap();
            assert!(g.capacities_unique());
        }
    }

    #[test]
    fn honest_wrapper_never_flags_bad() {
        let mut rng = SplitRng::from_path(11, &[0x6976]);
        let params = SpongeParams::sample_iv(4, 8, 8, 4, &mut rng).unwrap();
        let oracle = FunctionTable::new(11, 0x46, 8, 0, 4).unwrap();
        let mut sim = CrookedSpongeSim::new(
            params.clone(),
            Implementation::honest(),
            oracle,
            SplitRng::from_path(11, &[0x6e6e]),
        );
        let mut probe = SplitRng::new(43);
        for _ in 0..30 {
            let x = Node::new(
                BitStr::masked(probe.next_u64(), 4),
                BitStr::masked(probe.next_u64(), 8),
            );
            assert!(sim.query(x).unwrap().is_some());
        }
        assert!(!sim.bad);
    }

    #[test]
    fn unmarked_queries_never_run_the_implementation() {
        let mut rng = SplitRng::from_path(12, &[0x6976]);
        let params = SpongeParams::sample_iv(4, 4, 8, 4, &mut rng).unwrap();
        let oracle = FunctionTable::new(12, 0x46, 8, 0, 4).unwrap();
        let mut sim = CrookedSpongeSim::new(
            params.clone(),
            Implementation::from_parts(
                SubverterKind::OutputPredicate { zero_bits: 1 },
                Transcript::new(),
            ),
            oracle,
            SplitRng::from_path(12, &[0x6e6e]),
        );
        let off_class = Node::new(params.iv.rate, params.iv.cap.flip_low_bit());
        sim.query(off_class).unwrap().unwrap();
        assert_eq!(sim.impl_calls, 0);
    }

    #[test]
    fn crooked_root_query_flags_bad() {
        // subvert everything: the first marked query must deviate
        let mut rng = SplitRng::from_path(13, &[0x6976]);
        let params = SpongeParams::sample_iv(4, 4, 8, 4, &mut rng).unwrap();
        let oracle = FunctionTable::new(13, 0x46, 8, 0, 4).unwrap();
        let mut sim = CrookedSpongeSim::new(
            params.clone(),
            Implementation::from_parts(
                SubverterKind::OutputPredicate { zero_bits: 0 },
                Transcript::new(),
            ),
            oracle,
            SplitRng::from_path(13, &[0x6e6e]),
        );
        let answer = sim.query(params.iv).unwrap();
        assert!(answer.is_none());
        assert!(sim.bad);
    }
}
