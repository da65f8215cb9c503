use std::fmt::Write;

use super::{histogram_bin, AccuracyCurve, AreaRatioSample, MetricsError, PrCurve};

pub fn pr_curve_csv(curve: &PrCurve) -> String {
    let mut out = String::from("threshold,precision,recall\n");
    for p in &curve.points {
        writeln!(out, "{},{},{}", p.threshold, p.precision, p.recall).unwrap();
    }
    out
}

/// Equal-width histogram of area ratios, split by occlusion label.
pub fn histogram_csv(samples: &[AreaRatioSample], bins: usize) -> Result<String, MetricsError> {
    let bins = bins.max(1);
    let mut occ = vec![0u64; bins];
    let mut unocc = vec![0u64; bins];
    for s in samples {
        super::check_unit(s.ratio)?;
        let k = histogram_bin(s.ratio, bins);
        if s.occluded {
            occ[k] += 1;
        } else {
            unocc[k] += 1;
        }
    }
    let mut out = String::from("bin_lo,bin_hi,count_occluded,count_unoccluded\n");
    for k in 0..bins {
        let lo = k as f64 / bins as f64;
        let hi = (k + 1) as f64 / bins as f64;
        writeln!(out, "{lo},{hi},{},{}", occ[k], unocc[k]).unwrap();
    }
    Ok(out)
}

pub fn accuracy_csv(curve: &AccuracyCurve) -> String {
    let mut out = String::from("cutoff,accuracy\n");
    for (c, a) in curve.cutoffs.iter().zip(&curve.accuracy) {
        writeln!(out, "{c},{a}").unwrap();
    }
    out
}
