use idca::{ComponentDescription, IqpProblem, PolyhedralPiece};
use idca_cli::{parse_problem, ProblemFile};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn bits<'a>(values: impl IntoIterator<Item = &'a f64>) -> Vec<u64> {
    values.into_iter().map(|v| v.to_bits()).collect()
}

fn same_bits(a: &ProblemFile, b: &ProblemFile) -> bool {
    let (p, r) = (&a.problem, &b.problem);
    let data_match = bits(p.q_mat().iter()) == bits(r.q_mat().iter())
        && bits(p.q_vec().iter()) == bits(r.q_vec().iter())
        && bits(p.a().iter()) == bits(r.a().iter())
        && bits(p.b().iter()) == bits(r.b().iter());
    let starts_match = a.starts.len() == b.starts.len()
        && a.starts
            .iter()
            .zip(&b.starts)
            .all(|((n1, x1), (n2, x2))| n1 == n2 && bits(x1.iter()) == bits(x2.iter()));
    let comps_match = a.components.len() == b.components.len()
        && a.components.iter().zip(&b.components).all(|(c1, c2)| {
            c1.name == c2.name
                && c1.pieces.len() == c2.pieces.len()
                && c1.pieces.iter().zip(&c2.pieces).all(|(x, y)| {
                    bits(x.aeq.iter()) == bits(y.aeq.iter())
                        && bits(x.beq.iter()) == bits(y.beq.iter())
                        && bits(x.aineq.iter()) == bits(y.aineq.iter())
                        && bits(x.bineq.iter()) == bits(y.bineq.iter())
                })
        });
    data_match && starts_match && comps_match
}

fn moderate() -> impl Strategy<Value = f64> {
    prop_oneof![
        -10.0f64..10.0,
        Just(-0.0),
        (-50i32..50, 1i32..50).prop_map(|(p, q)| p as f64 / q as f64),
    ]
}

/// Includes tiny and huge magnitudes; used only where no LP sees the data.
fn value() -> impl Strategy<Value = f64> {
    prop_oneof![
        -10.0f64..10.0,
        (-1e-12f64..1e-12),
        (-1e20f64..1e20),
        Just(-0.0),
        (-50i32..50, 1i32..50).prop_map(|(p, q)| p as f64 / q as f64),
    ]
}

prop_compose! {
    fn problem_file()(n in 1usize..4, m in 1usize..5)(
        n in Just(n),
        m in Just(m),
        q_raw in prop::collection::vec(value(), n * n),
        q_vec in prop::collection::vec(value(), n),
        a in prop::collection::vec(moderate(), m * n),
        x_star in prop::collection::vec(-5.0f64..5.0, n),
        slack in prop::collection::vec(0.0f64..3.0, m),
    ) -> ProblemFile {
        let raw = DMatrix::from_row_slice(n, n, &q_raw);
        let q_mat = DMatrix::from_fn(n, n, |i, j| if i <= j { raw[(i, j)] } else { raw[(j, i)] });
        let a = DMatrix::from_row_slice(m, n, &a);
        let x_star = DVector::from_vec(x_star);
        let b = &a * &x_star - DVector::from_vec(slack);
        let problem = IqpProblem::new(q_mat, DVector::from_vec(q_vec), a, b).unwrap();
        let piece = PolyhedralPiece::point(&x_star).unwrap();
        ProblemFile {
            problem,
            starts: vec![("x_star".into(), x_star)],
            components: vec![ComponentDescription { name: "K".into(), pieces: vec![piece] }],
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn parse_serialize_parse_is_bitwise_stable(file in problem_file()) {
        let parsed = parse_problem(&file.to_string()).unwrap();
        prop_assert!(same_bits(&file, &parsed), "{}", file);
        let again = parse_problem(&parsed.to_string()).unwrap();
        prop_assert!(same_bits(&parsed, &again));
    }
}
