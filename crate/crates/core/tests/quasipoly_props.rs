use num_rational::BigRational;
use proptest::prelude::*;

use vpf_core::arith::AffineForm;
use vpf_core::engine::system::SystemMatrix;
use vpf_core::engine::{symbolic, EngineOptions};
use vpf_core::quasipoly::{from_json, to_json, QuasiPolynomial};
use vpf_core::Parallelism;

fn qi(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

/// `c0[b mod p] + c1[b mod p] * b + b^2 / 2` in one parameter.
#[derive(Clone, Debug)]
struct Shape {
    period: u64,
    c0: Vec<i64>,
    c1: Vec<i64>,
}

impl Shape {
    fn value(&self, b: i64) -> BigRational {
        let r = b.rem_euclid(self.period as i64) as usize;
        qi(self.c0[r]) + qi(self.c1[r] * b) + BigRational::new((b * b).into(), 2.into())
    }

    fn build(&self) -> QuasiPolynomial {
        QuasiPolynomial::fit(vec!["b".into()], vec![self.period], 2, Parallelism::Sequential, |b| Ok(self.value(b[0])))
            .unwrap()
    }
}

fn shape() -> impl Strategy<Value = Shape> {
    (1u64..=4).prop_flat_map(|p| {
        let v = prop::collection::vec(-5i64..=5, p as usize);
        (Just(p), v.clone(), v).prop_map(|(period, c0, c1)| Shape { period, c0, c1 })
    })
}

proptest! {
    #[test]
    fn fit_reproduces_values(s in shape()) {
        let q = s.build();
        for b in -30..30 {
            prop_assert_eq!(q.eval(&[b]).unwrap(), s.value(b));
        }
        prop_assert_eq!(q.degree(), Some(2));
        prop_assert_eq!(s.period % q.period()[0], 0);
    }

    #[test]
    fn add_and_scale_are_pointwise(s in shape(), t in shape(), k in -6i64..=6) {
        let (p, q) = (s.build(), t.build());
        let sum = p.add(&q).unwrap();
        let scaled = p.scale(&qi(k));
        for b in -20..20 {
            prop_assert_eq!(sum.eval(&[b]).unwrap(), s.value(b) + t.value(b));
            prop_assert_eq!(scaled.eval(&[b]).unwrap(), qi(k) * s.value(b));
        }
    }

    #[test]
    fn composition_substitutes(s in shape(), m in -3i64..=3, c in -5i64..=5) {
        let q = s.build();
        let f = AffineForm::new([(0, m), (1, 1)], c);
        let composed = q.compose_affine(&[f], vec!["x".into(), "y".into()]).unwrap();
        for x in -6..6 {
            for y in -6..6 {
                prop_assert_eq!(composed.eval(&[x, y]).unwrap(), s.value(m * x + y + c));
            }
        }
    }

    #[test]
    fn minimize_keeps_function(s in shape()) {
        let q = s.build();
        let lifted = q.lift(&[12]).unwrap();
        prop_assert!(lifted.same_function(&q));
        let minimized = lifted.clone().minimize();
        prop_assert_eq!(minimized.period(), q.period());
    }

    #[test]
    fn json_round_trip(rows in prop::collection::vec(prop::collection::vec(1i64..=3, 3), 1..=2)) {
        let a = SystemMatrix::new(rows).unwrap();
        let pw = symbolic(&a, &EngineOptions::default()).unwrap().result;
        let text = to_json(&pw).unwrap();
        let back = from_json(&text).unwrap();
        prop_assert_eq!(to_json(&back).unwrap(), text);
        for b in 0..8 {
            let point = vec![b; a.m()];
            prop_assert_eq!(back.eval(&point).unwrap(), pw.eval(&point).unwrap());
        }
    }
}
