mod common;

use fairsect::counts::marginalize;
use fairsect::metrics::{epsilon_for_counts, Smoothing};
use fairsect::FairnessMetric;
use proptest::prelude::*;

use common::{schema_of, table};

/// Attribute sizes and matching `[tn, fp, fn, tp]` cells, every cell > 0.
fn tables() -> impl Strategy<Value = (Vec<usize>, Vec<[u64; 4]>)> {
    prop::collection::vec(2usize..4, 2..4).prop_flat_map(|sizes| {
        let k: usize = sizes.iter().product();
        (
            Just(sizes),
            prop::collection::vec(prop::array::uniform4(1u64..40), k),
        )
    })
}

fn eps(t: &fairsect::CountsTable, m: FairnessMetric, s: Smoothing) -> f64 {
    epsilon_for_counts(t, m, s).unwrap().eps
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// Merging subgroups can only average rates, so no marginal space is
    /// less fair than the full intersection.
    #[test]
    fn marginal_never_exceeds_full((sizes, cells) in tables()) {
        let schema = schema_of(&sizes);
        let names: Vec<String> = schema.attributes().iter().map(|a| a.name.clone()).collect();
        let full = table(schema, &cells);
        for mask in 1u32..(1 << names.len()) - 1 {
            let keep: Vec<&str> = names
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, n)| n.as_str())
                .collect();
            let marginal = marginalize(&full, &keep).unwrap();
            for m in FairnessMetric::ALL {
                let (f, g) = (eps(&full, m, Smoothing::NONE), eps(&marginal, m, Smoothing::NONE));
                prop_assert!(g <= f + 1e-12, "{m} keep {keep:?}: marginal {g} > full {f}");
            }
        }
    }

    #[test]
    fn invariant_under_scaling_counts((sizes, cells) in tables(), c in 2u64..50) {
        let schema = schema_of(&sizes);
        let scaled: Vec<[u64; 4]> = cells.iter().map(|x| x.map(|v| v * c)).collect();
        let a = table(schema.clone(), &cells);
        let b = table(schema, &scaled);
        for m in FairnessMetric::ALL {
            let (x, y) = (eps(&a, m, Smoothing::NONE), eps(&b, m, Smoothing::NONE));
            prop_assert!((x - y).abs() <= 1e-12 * x.max(1.0));
        }
    }

    /// Relabelling the categories of an attribute reorders the subgroups but
    /// leaves every ε unchanged.
    #[test]
    fn invariant_under_relabelling((sizes, cells) in tables(), smooth in prop::bool::ANY) {
        let schema = schema_of(&sizes);
        let flipped = {
            let mut attrs = schema.attributes().to_vec();
            attrs[0].labels.reverse();
            fairsect::AttributeSchema::from_attributes(attrs).unwrap()
        };
        let mut moved = vec![[0u64; 4]; cells.len()];
        for (s, c) in cells.iter().enumerate() {
            let mut key = schema.key_at(s);
            key.0[0] = sizes[0] as u32 - 1 - key.0[0];
            moved[flipped.index_of(&key)] = *c;
        }
        let sm = if smooth { Smoothing::default() } else { Smoothing::NONE };
        let a = table(schema, &cells);
        let b = table(flipped, &moved);
        for m in FairnessMetric::ALL {
            prop_assert_eq!(eps(&a, m, sm), eps(&b, m, sm));
        }
    }

    #[test]
    fn nonnegative_and_zero_for_identical_rows(cell in prop::array::uniform4(1u64..40), k in 2usize..7) {
        let t = table(schema_of(&[k]), &vec![cell; k]);
        for m in FairnessMetric::ALL {
            let e = eps(&t, m, Smoothing::default());
            prop_assert!(e >= 0.0);
            if m != FairnessMetric::Elift {
                prop_assert_eq!(e, 0.0);
            }
        }
    }
}
