//! Systoles of congruence kernels in F2 grow like log of the index.
//!
//!     cargo run --example systolic_growth

use volent::systole::{cayley_systole, sigma_scan_multiples, stabilized_seminorm, GrowthProfile, MarkedGroup, SubgroupSpec};

fn main() -> volent::Result<()> {
    let f2 = MarkedGroup::free(2);
    let family: Vec<SubgroupSpec> = [3, 5, 7, 11, 13].iter().map(|&p| SubgroupSpec::sl2_congruence(p)).collect();
    let scan = sigma_scan_multiples(&f2, &family, 1)?;
    println!("{:>6} {:>4} {:>6} {:>10}", "k", "sys", "vol", "vol/sys");
    for r in &scan.rows {
        println!("{:>6} {:>4} {:>6} {:>10.3}", r.k, r.sys, r.vol, r.ratio);
    }
    println!("sys ~ {:.4} log k, ratio ~ {:.4} k / log k", scan.fit_c, scan.fit_ratio_c);

    let samples: Vec<(u64, f64)> = scan.rows.iter().map(|r| (r.k as u64, r.ratio)).collect();
    println!("seminorm estimate {:.4}", stabilized_seminorm(&samples, GrowthProfile::KOverLogPow(1))?);

    let s3 = cayley_systole(&f2, &SubgroupSpec::sl2_congruence(3))?;
    let s9 = cayley_systole(&f2, &SubgroupSpec::sl2_congruence(9))?;
    println!("nested kernels: mod 3 -> {s3}, mod 9 -> {s9}");
    Ok(())
}
