//! Aggregations shared by economic and emissions vectors laid out over a
//! [`RegionSectorIndex`].

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::index::{IndexError, RegionSectorIndex, Sector};

/// In-state / out-of-state decomposition of a vector total.
///
/// `total` is defined as `in_state + out_of_state` (one rounding), so the
/// parts always reconcile exactly with the reported total.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InStateSplit {
    pub in_state: f64,
    pub out_of_state: f64,
    pub total: f64,
}

/// A value per `(region, sector)` position.
pub trait RegionSectorVector {
    fn index(&self) -> &Arc<RegionSectorIndex>;
    fn values(&self) -> &[f64];

    /// Sum over all positions in region-block order.
    fn total(&self) -> f64 {
        self.region_sums().iter().sum()
    }

    /// Sum of each region's block, in region order.
    fn region_sums(&self) -> Vec<f64> {
        let idx = self.index();
        (0..idx.n_regions())
            .map(|r| self.values()[idx.block(r)].iter().sum())
            .collect()
    }

    /// Splits the total into the home region's block and everything else.
    fn split_in_state(&self, home: &str) -> Result<InStateSplit, IndexError> {
        let idx = self.index();
        let h = idx.require_region(home)?;
        let sums = self.region_sums();
        let in_state = sums[h];
        let out_of_state: f64 = sums
            .iter()
            .enumerate()
            .filter(|(r, _)| *r != h)
            .map(|(_, v)| v)
            .sum();
        Ok(InStateSplit {
            in_state,
            out_of_state,
            total: in_state + out_of_state,
        })
    }

    /// Per-sector totals aggregated across regions, in taxonomy order.
    fn sector_sums(&self) -> Vec<f64> {
        let idx = self.index();
        let mut agg = vec![0.0; idx.n_sectors()];
        for r in 0..idx.n_regions() {
            for (acc, v) in agg.iter_mut().zip(&self.values()[idx.block(r)]) {
                *acc += v;
            }
        }
        agg
    }

    /// The `k` largest sectors after aggregating across regions.
    ///
    /// Sorted by value descending, ties broken by sector code ascending.
    /// Returns every sector when `k` exceeds the sector count.
    fn top_sectors(&self, k: usize) -> Vec<(Sector, f64)> {
        let idx = self.index();
        let mut ranked: Vec<(usize, f64)> = self.sector_sums().into_iter().enumerate().collect();
        ranked.sort_by(|a, b| {
            b.1.total_cmp(&a.1)
                .then_with(|| idx.sector(a.0).code.cmp(&idx.sector(b.0).code))
        });
        ranked
            .into_iter()
            .take(k)
            .map(|(s, v)| (idx.sector(s).clone(), v))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::{Region, SectorCode};
    use alloc::format;

    struct V(Arc<RegionSectorIndex>, Vec<f64>);

    impl RegionSectorVector for V {
        fn index(&self) -> &Arc<RegionSectorIndex> {
            &self.0
        }
        fn values(&self) -> &[f64] {
            &self.1
        }
    }

    fn idx(regions: usize, sectors: &[&str]) -> Arc<RegionSectorIndex> {
        let r = (0..regions)
            .map(|i| Region::new(format!("R{i}"), "").unwrap())
            .collect();
        let s = sectors.iter().map(|c| Sector::parse(c, "").unwrap()).collect();
        Arc::new(RegionSectorIndex::new(r, s).unwrap())
    }

    #[test]
    fn split_examples() {
        let single = V(idx(1, &["111", "222"]), vec![1.0, 2.0]);
        let s = single.split_in_state("R0").unwrap();
        assert_eq!((s.in_state, s.out_of_state), (3.0, 0.0));

        let two = V(idx(2, &["111"]), vec![3.0, 7.0]);
        let s = two.split_in_state("R0").unwrap();
        assert_eq!((s.in_state, s.out_of_state), (3.0, 7.0));

        let three = V(idx(3, &["111", "222"]), vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let s = three.split_in_state("R1").unwrap();
        assert_eq!((s.in_state, s.out_of_state, s.total), (7.0, 14.0, 21.0));
        assert!(three.split_in_state("ZZ").is_err());
    }

    #[test]
    fn top_sector_examples() {
        let zeros = V(idx(1, &["333", "111", "222", "WIND"]), vec![0.0; 4]);
        let top = zeros.top_sectors(3);
        let codes: Vec<_> = top.iter().map(|(s, _)| s.code).collect();
        assert_eq!(
            codes,
            vec![
                SectorCode::Naics(*b"111"),
                SectorCode::Naics(*b"222"),
                SectorCode::Naics(*b"333")
            ]
        );

        let x = V(idx(2, &["111", "222"]), vec![1.0, 5.0, 2.0, 0.0]);
        let top = x.top_sectors(1);
        assert_eq!(top.len(), 1);
        assert_eq!(top[0].0.code, SectorCode::Naics(*b"222"));
        assert_eq!(top[0].1, 5.0);

        let all = x.top_sectors(10);
        assert_eq!(all.len(), 2);
        assert_eq!(all[1].1, 3.0);
    }
}
