//! Unit conversions used at configuration boundaries. Everything inside the
//! solvers is linear scale (watts, dimensionless gains).

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reference_points() {
        assert!((dbm_to_watts(30.0) - 1.0).abs() < 1e-15);
        assert!((dbm_to_watts(-100.0) - 1e-13).abs() < 1e-28);
        assert!((db_to_linear(-30.0) - 1e-3).abs() < 1e-18);
        assert!((dbm_to_watts(35.0) - 3.162_277_660_168_379_5).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn dbm_round_trip(dbm in -150.0f64..60.0) {
            let back = watts_to_dbm(dbm_to_watts(dbm));
            let rel = ((back - dbm) / dbm.abs().max(1.0)).abs();
            prop_assert!(rel < 1e-12, "dbm={dbm} back={back}");
        }

        #[test]
        fn watt_round_trip(w in 1e-18f64..1e4) {
            let back = dbm_to_watts(watts_to_dbm(w));
            prop_assert!(((back - w) / w).abs() < 1e-12);
        }
    }
}
