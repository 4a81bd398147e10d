use graphlift_sat::{
    clause_satisfied, read_cnf, solver_from_cnf, write_cnf, Budget, Cnf, Lit, Solver, SolverConfig,
    Status, Var,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn brute_force(num_vars: usize, clauses: &[Vec<Lit>]) -> bool {
    (0u64..1 << num_vars).any(|mask| {
        let a: Vec<bool> = (0..num_vars).map(|i| mask >> i & 1 == 1).collect();
        clauses.iter().all(|c| clause_satisfied(c, &a))
    })
}

fn clause_strategy(num_vars: usize) -> impl Strategy<Value = Vec<Lit>> {
    prop::collection::vec((0..num_vars as u32, any::<bool>()), 1..4)
        .prop_map(|xs| xs.into_iter().map(|(v, n)| Lit::new(Var::new(v), n)).collect())
}

fn formula() -> impl Strategy<Value = (usize, Vec<Vec<Lit>>)> {
    (1usize..9).prop_flat_map(|n| (Just(n), prop::collection::vec(clause_strategy(n), 0..40)))
}

fn stress_config() -> SolverConfig {
    SolverConfig {
        restart_base: 3,
        reduce_first: 5,
        reduce_increment: 1,
        ..SolverConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn agrees_with_truth_table((n, clauses) in formula()) {
        let mut s = Solver::with_config(stress_config());
        s.ensure_vars(n);
        for c in &clauses {
            s.add_clause(c);
        }
        let expected = brute_force(n, &clauses);
        let status = s.solve(&[], &Budget::unlimited());
        prop_assert_eq!(status == Status::Sat, expected);
        if status == Status::Sat {
            for c in &clauses {
                prop_assert!(clause_satisfied(c, s.model()));
            }
        }
    }

    #[test]
    fn assumptions_match_added_units(
        (n, clauses) in formula(),
        assume in prop::collection::vec((0u32..8, any::<bool>()), 0..4),
    ) {
        let assumptions: Vec<Lit> = assume
            .into_iter()
            .filter(|(v, _)| (*v as usize) < n)
            .map(|(v, neg)| Lit::new(Var::new(v), neg))
            .collect();
        let mut s = Solver::with_config(stress_config());
        s.ensure_vars(n);
        for c in &clauses {
            s.add_clause(c);
        }
        let mut with_units = clauses.clone();
        with_units.extend(assumptions.iter().map(|&l| vec![l]));
        let expected = brute_force(n, &with_units);
        let status = s.solve(&assumptions, &Budget::unlimited());
        prop_assert_eq!(status == Status::Sat, expected);
        if status == Status::Sat {
            for &l in &assumptions {
                prop_assert!(l.eval(s.model()));
            }
        }
        // The solver must be reusable without the assumptions afterwards.
        let free = s.solve(&[], &Budget::unlimited());
        prop_assert_eq!(free == Status::Sat, brute_force(n, &clauses));
    }

    #[test]
    fn dimacs_round_trip((n, clauses) in formula()) {
        let mut cnf = Cnf::new(n);
        for c in &clauses {
            cnf.add(c.clone());
        }
        let mut buf = Vec::new();
        write_cnf(&cnf, &["generated".to_string()], &mut buf).unwrap();
        let back = read_cnf(&buf[..]).unwrap();
        prop_assert_eq!(back, cnf);
    }
}

fn pigeonhole(pigeons: usize, holes: usize) -> Cnf {
    let p = |i: usize, j: usize| Var::new((i * holes + j) as u32);
    let mut cnf = Cnf::new(pigeons * holes);
    for i in 0..pigeons {
        cnf.add((0..holes).map(|j| p(i, j).pos()).collect());
    }
    for j in 0..holes {
        for a in 0..pigeons {
            for b in a + 1..pigeons {
                cnf.add(vec![p(a, j).neg(), p(b, j).neg()]);
            }
        }
    }
    cnf
}

#[test]
fn pigeonhole_is_unsat() {
    for n in 2..=7 {
        let mut s = solver_from_cnf(&pigeonhole(n + 1, n), stress_config());
        assert_eq!(s.solve(&[], &Budget::unlimited()), Status::Unsat, "php {n}");
        let mut s = solver_from_cnf(&pigeonhole(n, n), SolverConfig::default());
        assert_eq!(s.solve(&[], &Budget::unlimited()), Status::Sat, "php {n} fits");
    }
}

#[test]
fn random_3sat_near_threshold() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 120;
    let mut sat = 0;
    let mut unsat = 0;
    for _ in 0..20 {
        let mut cnf = Cnf::new(n);
        for _ in 0..(4.26 * n as f64) as usize {
            let c = (0..3)
                .map(|_| Lit::new(Var::new(rng.gen_range(0..n as u32)), rng.gen()))
                .collect();
            cnf.add(c);
        }
        let mut s = solver_from_cnf(&cnf, stress_config());
        match s.solve(&[], &Budget::unlimited()) {
            Status::Sat => {
                assert!(cnf.is_satisfied_by(s.model()));
                sat += 1;
            }
            Status::Unsat => unsat += 1,
            Status::Unknown => panic!("no budget was set"),
        }
    }
    assert!(sat > 0 && unsat > 0, "sat {sat} unsat {unsat}");
}

#[test]
fn seeded_runs_are_deterministic() {
    let cnf = pigeonhole(7, 7);
    let run = || {
        let mut s = solver_from_cnf(
            &cnf,
            SolverConfig {
                seed: 11,
                ..SolverConfig::default()
            },
        );
        assert_eq!(s.solve(&[], &Budget::unlimited()), Status::Sat);
        (s.model().to_vec(), s.stats().conflicts)
    };
    assert_eq!(run(), run());
}

#[test]
fn interrupt_flag_stops_search() {
    use std::sync::atomic::AtomicBool;
    use std::sync::Arc;
    let flag = Arc::new(AtomicBool::new(true));
    let mut s = solver_from_cnf(&pigeonhole(9, 8), SolverConfig::default());
    let status = s.solve(&[], &Budget::unlimited().with_interrupt(flag));
    assert_eq!(status, Status::Unknown);
}
