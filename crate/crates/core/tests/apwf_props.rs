//! Every encoded array decodes to the same bits.

use apwt::apwf::{self, ApwfFile};
use apwt::{BoundarySignal, Complex64, Grid2D, Sector};
use ndarray::Array2;
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        any::<f64>().prop_filter("finite", |v| v.is_finite()),
        Just(-0.0),
        Just(f64::MIN_POSITIVE / 4.0),
        Just(f64::MAX),
    ]
}

fn signal() -> impl Strategy<Value = BoundarySignal> {
    (2usize..9, 2usize..9, 1e-3f64..1e3, 1e-3f64..1e3, -1e6f64..1e6, -1e6f64..1e6).prop_flat_map(|(nt, nx, dt, dx, t0, x0)| {
        prop::collection::vec((finite(), finite()), nt * nx).prop_map(move |v| {
            let grid = Grid2D::new(nt, nx, dt, dx, (t0, x0)).unwrap();
            let values = Array2::from_shape_vec((nt, nx), v.into_iter().map(|(r, i)| Complex64::new(r, i)).collect()).unwrap();
            BoundarySignal::new(grid, values).unwrap()
        })
    })
}

fn bits(s: &BoundarySignal) -> Vec<(u64, u64)> {
    s.values().iter().map(|v| (v.re.to_bits(), v.im.to_bits())).collect()
}

fn through_bytes(file: &ApwfFile) -> ApwfFile {
    let mut buf = Vec::new();
    file.write_to(&mut buf).unwrap();
    ApwfFile::read_from(&buf[..]).unwrap()
}

proptest! {
    #[test]
    fn signals_roundtrip_bit_exactly(s in signal()) {
        let back = apwf::decode_signal(&through_bytes(&apwf::encode_signal(&s))).unwrap();
        prop_assert_eq!(bits(&back), bits(&s));
        let (g, h) = (s.grid(), back.grid());
        prop_assert_eq!(
            (g.n_t, g.n_x, g.dt.to_bits(), g.dx.to_bits(), g.origin.0.to_bits(), g.origin.1.to_bits()),
            (h.n_t, h.n_x, h.dt.to_bits(), h.dx.to_bits(), h.origin.0.to_bits(), h.origin.1.to_bits())
        );
    }

    #[test]
    fn fields_keep_height_and_sector(s in signal(), y in 0.0f64..1e4, j in 0u8..5) {
        let sector = (j > 0).then(|| Sector::try_from(j).unwrap());
        let file = apwf::encode_field(y, sector, s.grid(), s.values());
        let (y2, sector2, back) = apwf::decode_field(&through_bytes(&file)).unwrap();
        prop_assert_eq!((y2.to_bits(), sector2), (y.to_bits(), sector));
        prop_assert_eq!(bits(&back), bits(&s));
    }

    #[test]
    fn truncation_is_detected(s in signal(), cut in 1usize..64) {
        let mut buf = Vec::new();
        apwf::encode_signal(&s).write_to(&mut buf).unwrap();
        let keep = buf.len().saturating_sub(cut);
        prop_assert!(ApwfFile::read_from(&buf[..keep]).is_err());
    }
}
