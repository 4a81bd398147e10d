use graphlift::generators::{generate, intended_gripper, intended_hanoi, reference_model, DomainSpec};
use graphlift::model::cost_of;
use graphlift::semantics::{check_invariants, expand, Caps};

/// Node and edge counts computed independently of the generators: Hanoi has
/// pegs^disks states, and each state offers one move between every pair of
/// pegs whose tops differ (in exactly one direction).
fn hanoi_counts(disks: usize, pegs: usize) -> (usize, usize) {
    let nodes = pegs.pow(disks as u32);
    let mut edges = 0;
    for code in 0..nodes {
        let mut top = vec![usize::MAX; pegs];
        let mut c = code;
        for disk in 0..disks {
            let peg = c % pegs;
            c /= pegs;
            if top[peg] == usize::MAX {
                top[peg] = disk;
            }
        }
        for a in 0..pegs {
            for b in 0..pegs {
                if a != b && top[a] < top[b] {
                    edges += 1;
                }
            }
        }
    }
    (nodes, edges)
}

#[test]
fn hanoi_matches_direct_count() {
    for (disks, pegs) in [(3, 3), (4, 3), (3, 4), (2, 5)] {
        let g = generate(&DomainSpec::Hanoi { disks, pegs }).unwrap();
        assert_eq!((g.num_nodes, g.edges.len()), hanoi_counts(disks, pegs), "{disks} disks {pegs} pegs");
        let (d, inst) = intended_hanoi(disks, pegs);
        let e = expand(&d, &inst, Caps::default()).unwrap();
        assert_eq!((e.graph.num_nodes, e.graph.edges.len()), hanoi_counts(disks, pegs));
        assert!(check_invariants(&d.invariants, &e.table, &e.statics, &e.states).is_empty());
    }
}

#[test]
fn reference_invariants_hold() {
    for spec in [DomainSpec::Blocks2 { blocks: 3 }, DomainSpec::Hanoi { disks: 3, pegs: 3 }] {
        let (d, inst) = reference_model(&spec).unwrap();
        let e = expand(&d, &inst, Caps::default()).unwrap();
        assert!(check_invariants(&d.invariants, &e.table, &e.statics, &e.states).is_empty(), "{spec}");
    }
}

#[test]
fn intended_costs() {
    let (d, inst) = intended_hanoi(3, 3);
    let e = expand(&d, &inst, Caps::default()).unwrap();
    let c = cost_of(&d, &e.states);
    assert_eq!((c.n_a, c.n_p, c.n_s), (3, 3, 2));
    let (d, inst) = intended_gripper(3);
    let e = expand(&d, &inst, Caps::default()).unwrap();
    let c = cost_of(&d, &e.states);
    assert_eq!((c.n_a, c.n_p, c.n_s), (8, 5, 4));
}

#[test]
fn grids_have_no_reference_model() {
    assert!(reference_model(&DomainSpec::GridV1 { rows: 3, cols: 4 }).is_none());
}
