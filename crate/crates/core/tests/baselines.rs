use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sqf_core::baselines::*;
use sqf_core::data::synthetic::PRECIP;
use sqf_core::data::*;

/// `k`-th smallest value (0-based) by rank counting, without sorting.
fn order_statistic(values: &[f64], k: usize) -> f64 {
    for (i, &v) in values.iter().enumerate() {
        let below = values.iter().filter(|&&w| w < v).count();
        let tied_before = values[..i].iter().filter(|&&w| w == v).count();
        if below + tied_before == k {
            return v;
        }
    }
    unreachable!("rank {k} exists")
}

/// Linear interpolation between order statistics at `h = (n - 1) q`.
fn type7_oracle(values: &[f64], q: f64) -> f64 {
    let n = values.len();
    let h = (n - 1) as f64 * q;
    let lo = h.floor() as usize;
    let a = order_statistic(values, lo);
    let b = order_statistic(values, (lo + 1).min(n - 1));
    a + (h - lo as f64) * (b - a)
}

#[test]
fn ensemble_quantiles_match_rank_oracle() {
    let mut r = ChaCha8Rng::seed_from_u64(5);
    let grid = Grid::regular(0.0, 0.0, 0.4, 2, 2).unwrap();
    for _ in 0..60 {
        let n = r.random_range(2..=10);
        let weeks = r.random_range(1..4);
        let cal = Calendar::Weekly { start: WeekIndex::new(2016, 10).unwrap(), len: weeks };
        let members: Vec<GriddedSeries> = (0..n)
            .map(|m| {
                // few distinct values so ties occur
                let v = (0..weeks * 4).map(|_| r.random_range(0..6) as f64 * 1.5).collect();
                GriddedSeries::new(format!("member{m}"), grid.clone(), cal, v).unwrap()
            })
            .collect();
        let ens = EnsembleForecast::new(members.clone()).unwrap();
        let levels = [0.1, 0.25, 0.5, 0.9];
        let out = ensemble_quantiles(&ens, Aggregation::Max, &levels).unwrap();
        for t in 0..weeks {
            for l in grid.locations() {
                let sample: Vec<f64> = members.iter().map(|m| m.get(t, l.lat_index, l.lon_index)).collect();
                let got = out.get(t, l.lat_index, l.lon_index);
                for (qi, &q) in levels.iter().enumerate() {
                    assert_eq!(got[qi], type7_oracle(&sample, q));
                }
                let (lo, hi) = sample.iter().fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
                assert!(got.windows(2).all(|w| w[0] <= w[1]));
                assert!(got[0] >= lo && got[levels.len() - 1] <= hi);
            }
        }
    }
}

#[test]
fn ensemble_daily_members_take_weekly_maxima_first() {
    let grid = Grid::regular(0.0, 0.0, 0.4, 1, 1).unwrap();
    let cal = Calendar::daily_years(2016, 2016);
    let members: Vec<GriddedSeries> = (0..5)
        .map(|m| {
            let v = (0..cal.len()).map(|t| ((t * 7 + m * 3) % 11) as f64).collect();
            GriddedSeries::new("p", grid.clone(), cal, v).unwrap()
        })
        .collect();
    let out = ensemble_quantiles(&EnsembleForecast::new(members.clone()).unwrap(), Aggregation::Max, &[0.5]).unwrap();
    for t in [0, 20, 52] {
        let w = out.calendar.week(t);
        let maxima: Vec<f64> = members
            .iter()
            .map(|m| w.days().map(|d| m.get(cal.position_of_date(d).unwrap(), 0, 0)).fold(f64::MIN, f64::max))
            .collect();
        assert_eq!(out.get(t, 0, 0)[0], type7_oracle(&maxima, 0.5));
    }
}

#[test]
fn climatology_quantiles_match_rank_oracle() {
    let mut r = ChaCha8Rng::seed_from_u64(8);
    let grid = Grid::regular(0.0, 0.0, 0.25, 1, 2).unwrap();
    let base = YearRange::new(2001, 2005);
    for _ in 0..50 {
        let cal = Calendar::daily_years(2000, 2006);
        let v = (0..cal.len() * 2).map(|_| r.random_range(0.0..40.0f64).round()).collect();
        let daily = GriddedSeries::new(PRECIP, grid.clone(), cal, v).unwrap();
        let table = compute_climatology(&daily, Aggregation::Max, ClimatologyOp::Quantiles, base).unwrap();
        let weekly = aggregate_weekly(&daily, Aggregation::Max).unwrap();
        for week in [1u32, 17, 52, 53] {
            for l in grid.locations() {
                let sample: Vec<f64> = (0..weekly.steps())
                    .filter(|&t| {
                        let w = weekly.calendar.week(t);
                        w.week() == week && base.contains(w.year())
                    })
                    .map(|t| weekly.get(t, l.lat_index, l.lon_index))
                    .collect();
                assert_eq!(sample.len(), 5);
                let entry = table.entry(l.lat_index, l.lon_index, week);
                for (qi, &q) in TARGET_QUANTILES.iter().enumerate() {
                    assert_eq!(entry[qi], type7_oracle(&sample, q));
                }
                assert!(entry[0] <= entry[1] && entry[1] <= entry[2]);
            }
        }
    }
}

#[test]
fn climatology_values_one_to_thirty_give_median_fifteen_and_a_half() {
    let grid = Grid::regular(0.0, 0.0, 0.25, 1, 1).unwrap();
    let cal = Calendar::weekly_years(1981, 2010);
    let v = (0..cal.len()).map(|t| (cal.week(t).year() - 1980) as f64).collect();
    let weekly = GriddedSeries::new(PRECIP, grid, cal, v).unwrap();
    let table = climatology_from_weekly(&weekly, Aggregation::Max, ClimatologyOp::Quantiles, YearRange::new(1981, 2010)).unwrap();
    assert_eq!(table.entry(0, 0, 10)[1], 15.5);
    assert_eq!(table.sample_sizes, vec![30; 53]);
}

#[test]
fn climatology_is_year_invariant_and_wraps() {
    let grid = Grid::regular(0.0, 0.0, 0.25, 1, 1).unwrap();
    let cal = Calendar::weekly_years(2001, 2003);
    let v = (0..cal.len()).map(|t| cal.week(t).week() as f64).collect();
    let weekly = GriddedSeries::new(PRECIP, grid, cal, v).unwrap();
    let table = climatology_from_weekly(&weekly, Aggregation::Max, ClimatologyOp::Quantiles, YearRange::new(2001, 2003)).unwrap();
    let a = climatology_predict(&table, 0, 0, WeekIndex::new(2016, 5).unwrap(), 5);
    let b = climatology_predict(&table, 0, 0, WeekIndex::new(2019, 5).unwrap(), 5);
    assert_eq!(a, b);
    assert_eq!(a[1], 10.0);
    // week 50 plus 6 weeks lands in week 3 of the next year
    assert_eq!(climatology_predict(&table, 0, 0, WeekIndex::new(2016, 50).unwrap(), 6)[1], 3.0);
}

#[test]
fn climatology_text_round_trip() {
    let mut r = ChaCha8Rng::seed_from_u64(2);
    let grid = Grid::regular(-23.0, -44.0, 0.25, 2, 3).unwrap();
    let cal = Calendar::weekly_years(2001, 2004);
    let v = (0..cal.len() * 6).map(|_| r.random_range(0.0..50.0)).collect();
    let weekly = GriddedSeries::new(PRECIP, grid, cal, v).unwrap();
    let years = YearRange::new(2001, 2004);
    for op in [ClimatologyOp::Quantiles, ClimatologyOp::Mean] {
        let table = climatology_from_weekly(&weekly, Aggregation::Max, op, years).unwrap();
        let mut buf = Vec::new();
        write_climatology(&mut buf, &table).unwrap();
        let back = read_climatology(buf.as_slice(), Aggregation::Max, years).unwrap();
        assert_eq!(back.op, op);
        for l in table.grid.locations() {
            for w in 1..=53 {
                assert_eq!(back.entry(l.lat_index, l.lon_index, w), table.entry(l.lat_index, l.lon_index, w));
            }
        }
    }
}

#[test]
fn nearest_neighbour_refinement_replicates_quadrants() {
    let coarse = Grid::regular(0.0, 0.0, 0.4, 2, 2).unwrap();
    // fine centers a quarter spacing either side of each coarse center
    let fine = Grid::new(vec![-0.1, 0.1, 0.3, 0.5], vec![-0.1, 0.1, 0.3, 0.5]).unwrap();
    let cal = Calendar::Weekly { start: WeekIndex::new(2016, 1).unwrap(), len: 1 };
    let src = GriddedSeries::new("p", coarse, cal, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
    let out = nn_regrid(&src, &fine).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            assert_eq!(out.get(0, i, j), src.get(0, i / 2, j / 2));
        }
    }
    let same = nn_regrid(&src, &src.grid).unwrap();
    assert_eq!(same.values(), src.values());
}
