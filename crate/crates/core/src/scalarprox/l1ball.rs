/// Euclidean projection onto the ℓ1 ball `{x : Σ|xᵢ| ≤ radius}`.
///
/// Sort-based: with `u` the magnitudes in decreasing order, the threshold is
/// `θ = (Σ_{i≤ρ} uᵢ − radius)/ρ` where `ρ` is the largest index with
/// `u_ρ > θ_ρ`, and the projection soft-thresholds every entry by `θ`.
pub fn project_l1_ball(v: &[f64], radius: f64) -> Vec<f64> {
    debug_assert!(radius >= 0.0);
    let l1: f64 = v.iter().map(|x| x.abs()).sum();
    if l1 <= radius {
        return v.to_vec();
    }
    if radius <= 0.0 {
        return vec![0.0; v.len()];
    }
    let mut u: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cumsum += uj;
        let t = (cumsum - radius) / (j + 1) as f64;
        if uj > t {
            theta = t;
        } else {
            break;
        }
    }
    v.iter()
        .map(|&x| x.signum() * (x.abs() - theta).max(0.0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inside_ball_is_fixed() {
        let v = vec![0.2, -0.3, 0.1];
        assert_eq!(project_l1_ball(&v, 1.0), v);
    }

    #[test]
    fn single_spike() {
        assert_eq!(project_l1_ball(&[3.0, 0.0], 1.0), vec![1.0, 0.0]);
    }

    #[test]
    fn lands_on_sphere() {
        let p = project_l1_ball(&[1.0, -2.0, 0.5, 3.0], 2.0);
        let l1: f64 = p.iter().map(|x| x.abs()).sum();
        assert!((l1 - 2.0).abs() < 1e-14);
        assert_eq!(p[2], 0.0);
    }
}
