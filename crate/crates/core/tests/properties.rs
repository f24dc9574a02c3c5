#![allow(clippy::needless_range_loop)]

use std::collections::BTreeMap;
use std::sync::Arc;

use eemrio_core::accounts::RegionSectorVector;
use eemrio_core::linalg::DenseMatrix;
use eemrio_core::mrio::{
    derive_direct_requirements, impact, leontief_inverse, DirectRequirements, FinalDemandShock, LeontiefMethod,
    SupplyUseTables,
};
use eemrio_core::payback::{carbon_payback, economic_payback, CarbonInputs, EconomicInputs, GridTrajectory};
use eemrio_core::satellite::{regionalize, FacilityRecord, NationalInventory, ProxyShares};
use eemrio_core::{Region, RegionSectorIndex, Sector, SectorCode};
use proptest::prelude::*;

const SECTORS: [&str; 4] = ["111", "222", "333", "WIND"];

fn index(regions: usize, sectors: usize) -> Arc<RegionSectorIndex> {
    let r = (0..regions).map(|i| Region::new(format!("R{i}"), "").unwrap()).collect();
    let s = SECTORS[..sectors].iter().map(|c| Sector::parse(c, "").unwrap()).collect();
    Arc::new(RegionSectorIndex::new(r, s).unwrap())
}

/// Random nonnegative matrix rescaled so every column sums to at most `cap`.
fn productive(n: usize, raw: &[f64], cap: f64) -> DenseMatrix {
    let mut m = DenseMatrix::from_row_major(n, n, raw[..n * n].to_vec()).unwrap();
    let sums = m.col_sums();
    for j in 0..n {
        if sums[j] > cap {
            for i in 0..n {
                m.set(i, j, m.get(i, j) * cap / sums[j]);
            }
        }
    }
    m
}

fn layout() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=3, 1usize..=3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn market_share_columns_sum_to_one(
        (nr, ns) in layout(),
        raw_v in prop::collection::vec(0.0f64..10.0, 81),
        raw_u in prop::collection::vec(0.0f64..1.0, 81),
    ) {
        let idx = index(nr, ns);
        let n = idx.len();
        let mut v = DenseMatrix::from_row_major(n, n, raw_v[..n * n].to_vec()).unwrap();
        for i in 0..n {
            // keep every industry and product supplied
            v.set(i, i, v.get(i, i) + 1.0);
        }
        let u = DenseMatrix::from_row_major(n, n, raw_u[..n * n].iter().map(|x| x * 0.1).collect()).unwrap();
        let sut = SupplyUseTables::new(idx.clone(), idx.clone(), u, v, None).unwrap();
        let d = sut.market_shares();
        for s in d.col_sums() {
            prop_assert!((s - 1.0).abs() < 1e-12);
        }
        // g = row sums of V and A = D B
        let a = derive_direct_requirements(&sut).unwrap();
        let oracle = d.matmul(&sut.input_coefficients()).unwrap();
        prop_assert!(a.matrix().max_abs_diff(&oracle) < 1e-15);
    }

    #[test]
    fn direct_and_neumann_agree(
        n in 1usize..=12,
        raw in prop::collection::vec(0.0f64..1.0, 144),
        cap in 0.1f64..0.9,
    ) {
        let idx = index(n, 1);
        let a = DirectRequirements::new(idx, productive(n, &raw, cap)).unwrap();
        let direct = leontief_inverse(&a, LeontiefMethod::Direct).unwrap().to_matrix();
        let neumann = leontief_inverse(&a, LeontiefMethod::neumann_default()).unwrap();
        prop_assert!(neumann.is_explicit());
        prop_assert!(direct.max_abs_diff(&neumann.to_matrix()) < 1e-8);
        // every entry of L is at least the identity
        for i in 0..n {
            prop_assert!(direct.get(i, i) >= 1.0 - 1e-12);
        }
    }

    #[test]
    fn impacts_are_linear(
        n in 1usize..=10,
        raw in prop::collection::vec(0.0f64..1.0, 100),
        y1 in prop::collection::vec(0.0f64..100.0, 10),
        y2 in prop::collection::vec(0.0f64..100.0, 10),
        c in 0.0f64..50.0,
    ) {
        let idx = index(n, 1);
        let a = DirectRequirements::new(idx.clone(), productive(n, &raw, 0.8)).unwrap();
        let l = leontief_inverse(&a, LeontiefMethod::Direct).unwrap();
        let s1 = FinalDemandShock::new("a", idx.clone(), y1[..n].to_vec()).unwrap();
        let s2 = FinalDemandShock::new("b", idx.clone(), y2[..n].to_vec()).unwrap();
        let sum = s1.combined(&s2, "a+b").unwrap();
        let scaled = FinalDemandShock::new("ca", idx.clone(), y1[..n].iter().map(|v| c * v).collect()).unwrap();
        let (x1, x2) = (impact(&l, &s1).unwrap(), impact(&l, &s2).unwrap());
        let xs = impact(&l, &sum).unwrap();
        let xc = impact(&l, &scaled).unwrap();
        for i in 0..n {
            let lhs = xs.values()[i];
            let rhs = x1.values()[i] + x2.values()[i];
            prop_assert!((lhs - rhs).abs() <= 1e-9 * lhs.abs().max(1e-300) + 1e-12);
            let h = c * x1.values()[i];
            prop_assert!((xc.values()[i] - h).abs() <= 1e-9 * h.abs() + 1e-12);
        }
    }

    #[test]
    fn satellite_conserves_national_totals(
        nr in 1usize..=4,
        national in prop::collection::vec(0.0f64..1000.0, 3),
        facilities in prop::collection::vec((0usize..4, 0usize..3, 0.0f64..600.0), 0..12),
        weights in prop::collection::vec(0.01f64..1.0, 12),
    ) {
        let idx = index(nr, 4);
        let inv = NationalInventory::new(
            SECTORS[..3].iter().zip(&national).map(|(c, v)| (c.parse().unwrap(), *v)).collect(),
        ).unwrap();
        let recs: Vec<FacilityRecord> = facilities
            .iter()
            .map(|(r, s, e)| FacilityRecord {
                region: format!("R{}", r % nr),
                sector: SECTORS[*s].parse().unwrap(),
                emissions: *e,
            })
            .collect();
        let mut shares = BTreeMap::new();
        for (k, code) in SECTORS[..3].iter().enumerate() {
            let w = &weights[k * 4..k * 4 + nr];
            let total: f64 = w.iter().sum();
            let row = w.iter().enumerate().map(|(r, x)| (format!("R{r}"), x / total)).collect();
            shares.insert(code.parse::<SectorCode>().unwrap(), row);
        }
        let proxy = ProxyShares::new(shares).unwrap();
        let sat = regionalize(idx.clone(), &inv, &recs, &proxy).unwrap();
        let sums = sat.sector_sums();
        for (s, target) in national.iter().enumerate() {
            prop_assert!((sums[s] - target).abs() <= 1e-9 * target.max(1e-300));
        }
        for p in idx.wind_positions() {
            prop_assert_eq!(sat.values()[p], 0.0);
        }
        // record order does not matter
        let mut reversed = recs.clone();
        reversed.reverse();
        let again = regionalize(idx, &inv, &reversed, &proxy).unwrap();
        prop_assert_eq!(again.values(), sat.values());
    }

    #[test]
    fn economic_payback_monotone(
        c_i in 1.0f64..1e4,
        aep in 1e5f64..1e7,
        p_s in 50.0f64..200.0,
        c_op_frac in 0.0f64..0.5,
        bump in 1.01f64..2.0,
    ) {
        let c_op = c_op_frac * aep * p_s / 1e6;
        let base = economic_payback(&EconomicInputs::new(c_i, aep, p_s, c_op).unwrap()).unwrap();
        let more_price = economic_payback(&EconomicInputs::new(c_i, aep, p_s * bump, c_op).unwrap()).unwrap();
        let more_energy = economic_payback(&EconomicInputs::new(c_i, aep * bump, p_s, c_op).unwrap()).unwrap();
        let more_capex = economic_payback(&EconomicInputs::new(c_i * bump, aep, p_s, c_op).unwrap()).unwrap();
        prop_assert!(more_price < base);
        prop_assert!(more_energy < base);
        prop_assert!(more_capex > base);
        if c_op > 0.0 {
            let more_op = economic_payback(&EconomicInputs::new(c_i, aep, p_s, c_op * bump).unwrap());
            if let Ok(v) = more_op {
                prop_assert!(v > base);
            }
        }
    }

    #[test]
    fn carbon_payback_scales(
        em in 1e3f64..1e6,
        cap in 10.0f64..3000.0,
        r in 0.05f64..0.2,
    ) {
        let cpb = |em: f64, r: f64| {
            carbon_payback(&CarbonInputs::new(em, cap, GridTrajectory::constant(r).unwrap()).unwrap()).map(|c| c.months)
        };
        if let (Ok(full), Ok(half), Ok(double_rate)) = (cpb(em, r), cpb(em / 2.0, r), cpb(em, 2.0 * r)) {
            prop_assert!((half - full / 2.0).abs() <= 1e-12 * full);
            prop_assert!((double_rate - full / 2.0).abs() <= 1e-12 * full);
        }
    }
}
