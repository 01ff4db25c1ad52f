use pebblemark::builders::random_k1;
use pebblemark::pebbling::strategy_suite;
use pebblemark::stats::loglog_slope;
use pebblemark::Seed;
fn main() {
    let ns = [256usize, 512, 1024, 2048];
    let mut rows = std::collections::BTreeMap::<String, Vec<f64>>::new();
    for n in ns {
        let r = random_k1(n, &Seed::from_u64(1)).unwrap();
        let rr = r.resolve_pseudo(b"k").unwrap();
        let suite = strategy_suite(&r, &rr, &["keep-all", "greedy-discard", "generic-grid"]).unwrap();
        for (k, c) in suite { rows.entry(k).or_default().push(c.cc as f64); }
    }
    let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    for (k, ys) in rows { if ys.len() == 4 { println!("{k}: {:?} slope {:.4}", ys, loglog_slope(&xs, &ys)); } }
}
