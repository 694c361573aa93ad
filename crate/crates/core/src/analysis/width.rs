/// `wᵢ = 1/S`, the minimizer of `Σwᵢ²` on the simplex.
pub fn optimal_st_weights(s: usize) -> Vec<f64> {
    vec![1.0 / s as f64; s]
}

/// Images per second of each width, `R_peak / cost`.
pub fn ips(r_peak_mflops: f64, costs_mflops: &[f64]) -> Vec<f64> {
    costs_mflops.iter().map(|c| r_peak_mflops / c).collect()
}

/// Index of the widest entry of the ascending `costs_mflops` table that
/// still processes at least `ips_target` images per second.
pub fn ips_width_selection(r_peak_mflops: f64, costs_mflops: &[f64], ips_target: f64) -> Option<usize> {
    ips(r_peak_mflops, costs_mflops)
        .iter()
        .rposition(|&v| v >= ips_target * (1.0 - 1e-9))
}
