use std::sync::{Mutex, OnceLock};

use ktour::{
    classify, enumerate_tours, warnsdorf_construct, BoardDims, Cell, ClassFilter, Direction,
    Filter, SearchSpec, SymmetryOp, Tour,
};
use proptest::prelude::*;

fn swaps_axes(op: SymmetryOp) -> bool {
    matches!(
        op,
        SymmetryOp::Rotate90
            | SymmetryOp::Rotate270
            | SymmetryOp::ReflectDiag
            | SymmetryOp::ReflectAnti
    )
}

/// Tours built by Warnsdorf's rule from a random start on a random board.
fn warnsdorf_tour() -> impl Strategy<Value = Tour> {
    (
        5usize..=10,
        5usize..=12,
        any::<prop::sample::Index>(),
        any::<prop::sample::Index>(),
    )
        .prop_filter_map("rule hit a dead end", |(a, b, c, r)| {
            let dims = BoardDims::new(a, b).ok()?;
            let start = Cell {
                col: c.index(dims.width()),
                row: r.index(dims.height()),
            };
            warnsdorf_construct(dims, start).ok().flatten()
        })
}

/// Every semi-magic tour on 4x6, as found by the search.
fn semi_magic_4x6() -> &'static [Tour] {
    static TOURS: OnceLock<Vec<Tour>> = OnceLock::new();
    TOURS.get_or_init(|| {
        let found = Mutex::new(Vec::new());
        let spec = SearchSpec::new(BoardDims::new(4, 6).unwrap())
            .filter(Filter::class(ClassFilter::Semi(Some(Direction::Long))));
        enumerate_tours(&spec, &|t| found.lock().unwrap().push(t)).unwrap();
        let tours = found.into_inner().unwrap();
        assert!(!tours.is_empty());
        tours
    })
}

fn any_tour() -> impl Strategy<Value = Tour> {
    prop_oneof![
        warnsdorf_tour(),
        any::<prop::sample::Index>().prop_map(|i| {
            let tours = semi_magic_4x6();
            tours[i.index(tours.len())].clone()
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn text_round_trip(t in any_tour()) {
        prop_assert_eq!(Tour::parse(&t.to_text()).unwrap(), t);
    }

    #[test]
    fn canonical_form_is_idempotent_and_invariant(t in any_tour()) {
        let canon = t.frenicle_canonical();
        prop_assert_eq!(canon.as_tour().frenicle_canonical(), canon.clone());
        let geo = t.geometric_class();
        prop_assert_eq!(t.reversed().geometric_class(), geo.clone());
        for &op in t.dims().symmetry_group() {
            let image = t.transformed(op).unwrap();
            prop_assert_eq!(image.frenicle_canonical(), canon.clone());
            prop_assert_eq!(image.geometric_class(), geo.clone());
        }
    }

    #[test]
    fn classification_survives_symmetry_and_reversal(t in any_tour()) {
        let report = classify(&t);
        prop_assert_eq!(classify(&t.reversed()).class, report.class);
        for &op in t.dims().symmetry_group() {
            let class = classify(&t.transformed(op).unwrap()).class;
            let expected = if swaps_axes(op) { report.class.transposed() } else { report.class };
            prop_assert_eq!(class, expected, "{:?}", op);
        }
    }

    #[test]
    fn line_sums_add_up(t in any_tour()) {
        let n = t.len() as u64;
        let total = n * (n + 1) / 2;
        let sums = t.line_sums();
        prop_assert_eq!(sums.short_sums.len(), t.dims().height());
        prop_assert_eq!(sums.long_sums.len(), t.dims().width());
        prop_assert_eq!(sums.short_sums.iter().sum::<u64>(), total);
        prop_assert_eq!(sums.long_sums.iter().sum::<u64>(), total);
    }

    #[test]
    fn generated_tours_are_valid(t in any_tour()) {
        prop_assert!(t.validate().is_ok());
        let path = t.path().unwrap();
        prop_assert_eq!(Tour::from_path(t.dims(), &path).unwrap(), t);
    }
}
