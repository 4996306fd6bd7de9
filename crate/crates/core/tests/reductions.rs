use dcswitch::graphcheck::{euler_planarity_necessary, is_cactus, max_degree};
use dcswitch::network::{Bus, Line, Network};
use dcswitch::oracles::{ham_path_exists, longest_path, m3da_min, subset_sum_solvable};
use dcswitch::rational::{ExtRational, Rational};
use dcswitch::reductions::{
    build_cactus, build_hamiltonian, build_longest_path, build_m3da, build_sch, msf_to_ots, BuildMode,
    GraphInstance, M3daInstance, SchMode, SubsetSumInstance,
};
use dcswitch::solvers::{solve_feas, solve_msf, solve_ots, SearchOptions};

fn graph(edges: &[(&str, &str)]) -> GraphInstance {
    let mut vertices: Vec<String> = Vec::new();
    for (x, y) in edges {
        for v in [x, y] {
            if !vertices.iter().any(|w| w == v) {
                vertices.push(v.to_string());
            }
        }
    }
    let edges = edges.iter().map(|(x, y)| (x.to_string(), y.to_string())).collect();
    GraphInstance::new(vertices, edges, "a", "b").unwrap()
}

fn msf(net: &Network) -> ExtRational {
    solve_msf(net, &SearchOptions::default()).unwrap().value.unwrap()
}

#[test]
fn cactus_example_shape_and_verdict() {
    let ssi = SubsetSumInstance::new(vec![1, 2, 3], 5).unwrap();
    let net = build_cactus(&ssi, BuildMode::Repaired).unwrap().network;
    assert_eq!((net.buses().len(), net.lines().len()), (15, 18));
    assert!(is_cactus(&net).holds);
    assert_eq!(max_degree(&net), 3);
    let feasible = solve_feas(&net, &SearchOptions::default()).unwrap().is_feasible();
    assert_eq!(feasible, subset_sum_solvable(&ssi).is_some());

    let ssi = SubsetSumInstance::new(vec![2], 1).unwrap();
    let net = build_cactus(&ssi, BuildMode::Repaired).unwrap().network;
    assert!(!solve_feas(&net, &SearchOptions::default()).unwrap().is_feasible());
    assert!(subset_sum_solvable(&ssi).is_none());
}

#[test]
fn longest_path_offsets_agree_across_examples() {
    let graphs = [graph(&[("a", "b")]), graph(&[("a", "b"), ("b", "c"), ("a", "c")]), graph(&[("a", "c"), ("c", "b")])];
    let offsets: Vec<ExtRational> = graphs
        .iter()
        .map(|g| {
            let t = longest_path(g).unwrap().0 as i64;
            let value = msf(&build_longest_path(g, BuildMode::Repaired).unwrap().network);
            value.checked_sub(&ExtRational::int(t)).unwrap()
        })
        .collect();
    assert!(offsets.windows(2).all(|w| w[0] == w[1]), "{offsets:?}");
}

#[test]
fn hamiltonian_examples() {
    let two = ExtRational::int(2);
    let edge = graph(&[("a", "b")]);
    assert!(ham_path_exists(&edge).unwrap());
    assert_eq!(msf(&build_hamiltonian(&edge, BuildMode::Repaired).unwrap().network), two);

    let star = graph(&[("a", "b"), ("a", "c")]);
    assert!(!ham_path_exists(&star).unwrap());
    assert!(msf(&build_hamiltonian(&star, BuildMode::Repaired).unwrap().network) < two);
}

#[test]
fn hamiltonian_gadget_on_cubic_planar_input() {
    // K4 is cubic and planar; the gadget adds one line at a and one at b
    let k4 = graph(&[("a", "b"), ("a", "c"), ("a", "d"), ("b", "c"), ("b", "d"), ("c", "d")]);
    let net = build_hamiltonian(&k4, BuildMode::Repaired).unwrap().network;
    assert!(max_degree(&net) <= 4);
    let degree = |id: &str| net.lines().iter().filter(|l| l.a == id || l.b == id).count();
    for v in ["c", "d"] {
        assert_eq!(degree(v), 3);
    }
    assert!(euler_planarity_necessary(&net));
    assert_eq!(msf(&net) == ExtRational::int(2), ham_path_exists(&k4).unwrap());
}

#[test]
fn m3da_example() {
    let mi = M3daInstance::uniform(1, |_, _, _| 7);
    let report = build_m3da(&mi, BuildMode::Repaired).unwrap();
    assert_eq!((report.network.buses().len(), report.network.lines().len()), (7, 9));
    let t = report.network.bus("t[x1,y1,w1]").unwrap();
    assert_eq!(t.cost, ExtRational::Finite(Rational::new(7.into(), 3.into())));
    let ots = solve_ots(&report.network, &SearchOptions::default()).unwrap().value.unwrap();
    assert_eq!(ots, ExtRational::int(m3da_min(&mi).unwrap().0 as i64));
}

#[test]
fn mots_identity_examples() {
    let one = Rational::from_integer(1.into());
    let sch = build_sch(&one, SchMode::Plain, BuildMode::Repaired).unwrap().network;
    let single = Network::new(
        vec![
            Bus::new("g").generation(ExtRational::Infinity),
            Bus::new("l").load(ExtRational::zero(), ExtRational::int(5)),
        ],
        vec![Line::new("g-l", "g", "l", ExtRational::int(2), ExtRational::one())],
    )
    .unwrap();
    for (net, unserved) in [(sch, 0), (single, 3)] {
        let total = ExtRational::saturating_sum(net.buses().iter().map(|b| &b.plmax));
        assert_eq!(total.checked_sub(&msf(&net)).unwrap(), ExtRational::int(unserved));
        let transformed = msf_to_ots(&net).unwrap().network;
        let ots = solve_ots(&transformed, &SearchOptions::default()).unwrap().value.unwrap();
        assert_eq!(ots, ExtRational::int(unserved));
    }
}
