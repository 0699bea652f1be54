use srx_core::rrc::{rrc_filter_taps, RrcSpec};
fn lcg(state: &mut u64) -> f64 {
    *state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    ((*state >> 33) as f64 / (1u64 << 31) as f64) - 1.0
}
fn main() {
    let mut state = 11u64;
    let n_symbols = 4096;
    let symbols: Vec<f64> = (0..n_symbols).map(|_| if lcg(&mut state) > 0.0 { 1.0 } else { -1.0 }).collect();
    let taps = rrc_filter_taps(&RrcSpec::new(0.5, 1.0), 2.0, 65).unwrap();
    println!("tap center 32 = {:.4}, 31 = {:.4}, 33 = {:.4}, 30={:.4} 34={:.4}", taps[32], taps[31], taps[33], taps[30], taps[34]);
    let mut out = vec![0.0f64; n_symbols * 2];
    for (m, &a) in symbols.iter().enumerate() {
        for (t, &h) in taps.iter().enumerate() {
            let idx = 2 * m as i64 + t as i64 - 32;
            if idx >= 0 && (idx as usize) < out.len() { out[idx as usize] += a * h; }
        }
    }
    // mean |s| at even vs odd offsets
    for off in 0..4 {
        let score: f64 = (200..3800).map(|k| out[2*k + off].abs()).sum::<f64>() / 3600.0;
        println!("offset {off}: mean|s| = {score:.4}");
    }
}
