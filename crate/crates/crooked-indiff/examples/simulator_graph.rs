//! The sponge simulator graph up close: marking, path reconstruction,
//! oracle programming on full-length paths, and the JSON snapshot.
//!
//!     cargo run --example simulator_graph

use crooked_indiff::bits::BitStr;
use crooked_indiff::oracle::{FunctionTable, Point, Transcript};
use crooked_indiff::rng::SplitRng;
use crooked_indiff::sponge::{Node, SpongeParams, SpongeSimGraph};

fn main() {
    // r = c = 4, two-block messages, one digest block
    let mut iv_rng = SplitRng::new(0x517);
    let params = SpongeParams::sample_iv(4, 4, 8, 4, &mut iv_rng).unwrap();
    let oracle = FunctionTable::new(0x517, 0x46, 8, 0, 4).unwrap();
    let mut graph = SpongeSimGraph::new(params.clone(), &Transcript::new());
    let mut rng = SplitRng::new(0x517f);

    let root = graph.root();
    println!("root {:?}; marked: {}", root, graph.is_marked(root));

    // absorb the first block of a message
    let m1 = BitStr::new(0x9, 4).unwrap();
    let m2 = BitStr::new(0x3, 4).unwrap();
    let input1 = Node::new(root.rate ^ m1, root.cap);
    let y1 = graph.sim_query(input1, &oracle, &mut rng).unwrap();
    println!(
        "absorbed block {m1}: answer {:?}; its capacity class is now marked: {}",
        y1,
        graph.is_marked(Node::new(BitStr::zero(4), y1.cap))
    );

    // the second block completes the message: the oracle digest is laid in
    let input2 = Node::new(y1.rate ^ m2, y1.cap);
    println!("path to second input: {:?}", graph.findpath(input2).unwrap());
    let y2 = graph.sim_query(input2, &oracle, &mut rng).unwrap();
    let msg = m1.concat(m2);
    let digest = oracle.peek(Point::new(0, msg)).unwrap();
    println!(
        "full-length path: answer rate {} == first digest block {} of F({msg})",
        y2.rate,
        digest.slice_from_top(0, 4)
    );

    // an unrelated unmarked query just gets a fresh node
    let stray = Node::new(BitStr::new(0x1, 4).unwrap(), y2.cap.flip_low_bit());
    graph.sim_query(stray, &oracle, &mut rng).unwrap();
    println!(
        "\n{} edges, capacities unique: {}",
        graph.edge_count(),
        graph.capacities_unique()
    );
    println!("snapshot: {}", graph.snapshot_json());
}
