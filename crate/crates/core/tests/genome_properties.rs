use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use win_core::cppn::{
    compile, crossover, mutate, Activation, ConnectionGene, Genome, InnovationTable, MutationConfig, NodeGene, NodeKind,
};
use win_testkit::{genome_violations, grow_genome, recursive_evaluate};

fn aggressive() -> MutationConfig {
    MutationConfig { p_add_node: 0.5, p_add_connection: 0.7, p_change_activation: 0.3, ..MutationConfig::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn variation_preserves_invariants(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut innos = InnovationTable::with_seed_connections();
        let cfg = aggressive();
        let mut pool: Vec<Genome> = (0..4).map(|_| Genome::random_seed(&mut rng)).collect();
        for g in &pool {
            innos.absorb(g);
        }
        for step in 0..40 {
            let a = &pool[step % pool.len()];
            let b = &pool[(step * 7 + 1) % pool.len()];
            let child = if step % 2 == 0 {
                mutate(a, &cfg, &mut innos, &mut rng)
            } else {
                crossover(a, b, &mut rng).unwrap()
            };
            let problems = genome_violations(&child);
            prop_assert!(problems.is_empty(), "{:?}", problems);
            prop_assert!(child.validate().is_ok());
            let n = pool.len();
            pool[step % n] = child;
        }
    }

    #[test]
    fn compiled_matches_recursive_oracle(seed in any::<u64>(), x in -1.0f64..=1.0, y in -1.0f64..=1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut innos = InnovationTable::new();
        let g = grow_genome(&mut rng, 10, &mut innos);
        let net = compile(&g).unwrap();
        prop_assert_eq!(net.evaluate(x, y).to_bits(), recursive_evaluate(&g, x, y).to_bits());
    }

    #[test]
    fn canonical_form_is_idempotent_and_order_free(seed in any::<u64>(), shuffle in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut innos = InnovationTable::new();
        let g = grow_genome(&mut rng, 7, &mut innos);
        let bytes = g.canonicalize().unwrap();
        let reparsed = Genome::parse(&bytes).unwrap();
        prop_assert_eq!(reparsed.canonicalize().unwrap(), bytes.clone());

        let mut shuffled = g.clone();
        let mut srng = ChaCha8Rng::seed_from_u64(shuffle);
        shuffled.nodes.shuffle(&mut srng);
        shuffled.connections.shuffle(&mut srng);
        prop_assert_eq!(shuffled.canonicalize().unwrap(), bytes);
    }
}

#[test]
fn oracle_flags_a_cycle() {
    let mut nodes = Genome::fixed_nodes(Activation::Sigmoid);
    for id in [5, 6] {
        nodes.push(NodeGene { node_id: id, kind: NodeKind::Hidden, activation: Activation::Sine });
    }
    let conn = |innovation, from, to| ConnectionGene { innovation, from, to, weight: 1.0, enabled: true };
    let mut g = Genome::new(nodes, vec![conn(1, 0, 5), conn(2, 5, 6), conn(3, 6, 4)]);
    assert!(genome_violations(&g).is_empty());
    g.connections.push(conn(4, 6, 5));
    assert!(genome_violations(&g).iter().any(|v| v.contains("cycle")));
    assert!(g.validate().is_err());
}
