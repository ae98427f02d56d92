use super::DuoTrellis;

/// Trellis size of the constituent code.
pub const STATES: usize = 8;

/// Extrinsic or a-priori couple metrics for `u = 01, 10, 11`; `u = 00` is the zero reference.
pub type Extrinsic = [f64; 3];

type Metrics = [f64; STATES];

/// Index of the branch metric shared by every edge with labels `(u, y, w)`.
pub fn gamma_index(u: usize, y: u8, w: u8) -> usize {
    4 * u + 2 * y as usize + w as usize
}

/// The 16 distinct branch metrics of one step, indexed by [`gamma_index`].
///
/// `ch` holds the channel LLRs of `(A, B, Y, W)` (positive favours 0); a coded 1
/// contributes `-L` to the metric.
pub fn compute_gamma(ch: [f64; 4], apriori: Extrinsic) -> [f64; 16] {
    let mut g = [0.0; 16];
    for u in 0..4 {
        let (a, b) = (u >> 1, u & 1);
        let prior = if u == 0 { 0.0 } else { apriori[u - 1] };
        let sys = prior - a as f64 * ch[0] - b as f64 * ch[1];
        for y in 0..2u8 {
            for w in 0..2u8 {
                g[gamma_index(u, y, w)] = sys - y as f64 * ch[2] - w as f64 * ch[3];
            }
        }
    }
    g
}

fn normalize(m: &mut Metrics) {
    let top = m.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m.iter_mut().for_each(|x| *x -= top);
}

/// Border metrics of every window, read from the previous iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct SisoWindowState {
    /// α at the first step of each window.
    pub alpha: Vec<Metrics>,
    /// β after the last step of each window.
    pub beta: Vec<Metrics>,
    pub iteration: usize,
}

impl SisoWindowState {
    pub fn new(windows: usize) -> Self {
        SisoWindowState { alpha: vec![[0.0; STATES]; windows], beta: vec![[0.0; STATES]; windows], iteration: 0 }
    }

    pub fn windows(&self) -> usize {
        self.alpha.len()
    }

    /// Stores the metrics each window produced at its edges as the borders of its
    /// neighbours, wrapping around the tail-biting block.
    pub fn inherit(&mut self, outputs: &[WindowOutput]) {
        let nw = self.windows();
        assert_eq!(outputs.len(), nw);
        for (w, out) in outputs.iter().enumerate() {
            self.alpha[(w + 1) % nw] = out.alpha_end;
            self.beta[(w + nw - 1) % nw] = out.beta_start;
        }
        self.iteration += 1;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowOutput {
    pub extrinsic: Vec<Extrinsic>,
    /// A-posteriori couple metrics relative to `u = 00`.
    pub app: Vec<[f64; 4]>,
    pub alpha_end: Metrics,
    pub beta_start: Metrics,
}

impl WindowOutput {
    /// Couple with the largest a-posteriori metric, ties to the smaller value.
    pub fn decisions(&self) -> impl Iterator<Item = usize> + '_ {
        self.app.iter().map(|m| (0..4).fold(0, |best, u| if m[u] > m[best] { u } else { best }))
    }
}

/// Max-log BCJR over one window with the given border metrics.
pub fn siso_window(
    trellis: &DuoTrellis,
    ch: &[[f64; 4]],
    apriori: &[Extrinsic],
    alpha0: Metrics,
    beta_end: Metrics,
    scale: f64,
) -> WindowOutput {
    assert_eq!(ch.len(), apriori.len());
    let gammas: Vec<[f64; 16]> = ch.iter().zip(apriori).map(|(&c, &a)| compute_gamma(c, a)).collect();
    window_from_gammas(trellis, &gammas, ch, apriori, alpha0, beta_end, scale)
}

fn window_from_gammas(
    trellis: &DuoTrellis,
    gammas: &[[f64; 16]],
    ch: &[[f64; 4]],
    apriori: &[Extrinsic],
    alpha0: Metrics,
    beta_end: Metrics,
    scale: f64,
) -> WindowOutput {
    let len = gammas.len();
    let edges: Vec<_> = trellis.edges().map(|e| (e, gamma_index(e.u, e.y, e.w))).collect();

    let mut alpha = Vec::with_capacity(len + 1);
    let mut a = alpha0;
    normalize(&mut a);
    alpha.push(a);
    for g in gammas {
        let mut next = [f64::NEG_INFINITY; STATES];
        for &(e, gi) in &edges {
            next[e.end] = next[e.end].max(a[e.start] + g[gi]);
        }
        normalize(&mut next);
        alpha.push(next);
        a = next;
    }

    let mut beta = beta_end;
    normalize(&mut beta);
    let mut extrinsic = vec![[0.0; 3]; len];
    let mut app = vec![[0.0; 4]; len];
    for k in (0..len).rev() {
        let g = &gammas[k];
        let mut best = [f64::NEG_INFINITY; 4];
        let mut prev = [f64::NEG_INFINITY; STATES];
        for &(e, gi) in &edges {
            best[e.u] = best[e.u].max(alpha[k][e.start] + g[gi] + beta[e.end]);
            prev[e.start] = prev[e.start].max(beta[e.end] + g[gi]);
        }
        for u in 1..4 {
            let post = best[u] - best[0];
            let sys = -((u >> 1) as f64) * ch[k][0] - (u & 1) as f64 * ch[k][1];
            app[k][u] = post;
            extrinsic[k][u - 1] = scale * (post - apriori[k][u - 1] - sys);
        }
        normalize(&mut prev);
        beta = prev;
    }
    WindowOutput { extrinsic, app, alpha_end: alpha[len], beta_start: beta }
}

/// Runs every window of one constituent decoder against the borders of the previous
/// iteration, then updates the borders. `grid` lists `(start, len)` of each window.
pub fn siso_half_iteration(
    trellis: &DuoTrellis,
    ch: &[[f64; 4]],
    apriori: &[Extrinsic],
    borders: &mut SisoWindowState,
    grid: &[(usize, usize)],
    scale: f64,
) -> Vec<WindowOutput> {
    assert_eq!(grid.len(), borders.windows());
    let outputs: Vec<WindowOutput> = grid
        .iter()
        .enumerate()
        .map(|(w, &(s, l))| {
            siso_window(trellis, &ch[s..s + l], &apriori[s..s + l], borders.alpha[w], borders.beta[w], scale)
        })
        .collect();
    borders.inherit(&outputs);
    outputs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::StandardTables;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn trellis() -> DuoTrellis {
        let t = StandardTables::builtin();
        DuoTrellis::new(&t.constituent, t.circulation.clone()).unwrap()
    }

    /// Path metric maximised over every start state and every input sequence.
    fn brute_force(
        t: &DuoTrellis,
        ch: &[[f64; 4]],
        apri: &[Extrinsic],
        alpha0: Metrics,
        beta_end: Metrics,
    ) -> Vec<Extrinsic> {
        let n = ch.len();
        let mut best = vec![[f64::NEG_INFINITY; 4]; n];
        for s0 in 0..STATES {
            for seq in 0..4usize.pow(n as u32) {
                let us: Vec<usize> = (0..n).map(|k| (seq >> (2 * k)) & 3).collect();
                let mut s = s0;
                let mut metric = alpha0[s0];
                for (k, &u) in us.iter().enumerate() {
                    let (y, w) = t.parity(s, u);
                    let bits = [(u >> 1) as f64, (u & 1) as f64, y as f64, w as f64];
                    let prior = if u == 0 { 0.0 } else { apri[k][u - 1] };
                    metric += prior - (0..4).map(|i| bits[i] * ch[k][i]).sum::<f64>();
                    s = t.next_state(s, u);
                }
                metric += beta_end[s];
                for (k, &u) in us.iter().enumerate() {
                    best[k][u] = best[k][u].max(metric);
                }
            }
        }
        (0..n)
            .map(|k| {
                let mut e = [0.0; 3];
                for u in 1..4 {
                    let sys = -((u >> 1) as f64) * ch[k][0] - (u & 1) as f64 * ch[k][1];
                    e[u - 1] = best[k][u] - best[k][0] - apri[k][u - 1] - sys;
                }
                e
            })
            .collect()
    }

    fn random_inputs(rng: &mut ChaCha8Rng, n: usize) -> (Vec<[f64; 4]>, Vec<Extrinsic>, Metrics, Metrics) {
        let ch = (0..n).map(|_| [0; 4].map(|_: i32| rng.random_range(-4.0..4.0))).collect();
        let ap = (0..n).map(|_| [0; 3].map(|_: i32| rng.random_range(-2.0..2.0))).collect();
        let a0 = [0; STATES].map(|_: i32| rng.random_range(-3.0..0.0));
        let b0 = [0; STATES].map(|_: i32| rng.random_range(-3.0..0.0));
        (ch, ap, a0, b0)
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(compute_gamma([0.0; 4], [0.0; 3]), [0.0; 16]);
        let (a, b, y, w) = (0.7, -1.3, 2.1, 0.4);
        let g = compute_gamma([a, b, y, w], [0.0; 3]);
        assert_eq!(g[gamma_index(2, 1, 0)], -a - y);
        let base = compute_gamma([a, b, y, w], [0.3, -0.2, 0.5]);
        let bumped = compute_gamma([a, b, y, w], [0.3, -0.2, 0.5 + 1.25]);
        let t = trellis();
        let raised: Vec<_> = t
            .edges()
            .filter(|e| {
                let i = gamma_index(e.u, e.y, e.w);
                (bumped[i] - base[i] - 1.25).abs() < 1e-12
            })
            .collect();
        assert_eq!(raised.len(), 8);
        assert!(raised.iter().all(|e| e.u == 3));
    }

    #[test]
    fn matches_exhaustive_enumeration() {
        let t = trellis();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..20 {
            let (ch, ap, a0, b0) = random_inputs(&mut rng, 4);
            let out = siso_window(&t, &ch, &ap, a0, b0, 1.0);
            let oracle = brute_force(&t, &ch, &ap, a0, b0);
            for (x, y) in out.extrinsic.iter().zip(&oracle) {
                for u in 0..3 {
                    assert!((x[u] - y[u]).abs() <= 1e-9, "{x:?} vs {y:?}");
                }
            }
        }
    }

    #[test]
    fn zero_input_gives_zero_extrinsic() {
        let t = trellis();
        let out = siso_window(&t, &[[0.0; 4]; 6], &[[0.0; 3]; 6], [0.0; 8], [0.0; 8], 1.0);
        assert!(out.extrinsic.iter().all(|e| e.iter().all(|&x| x == 0.0)));
    }

    #[test]
    fn borders_wrap_around() {
        let t = trellis();
        let mut st = SisoWindowState::new(3);
        let grid = [(0, 2), (2, 2), (4, 2)];
        let outs = siso_half_iteration(&t, &[[1.0, -1.0, 0.5, 0.2]; 6], &[[0.0; 3]; 6], &mut st, &grid, 1.0);
        assert_eq!(st.iteration, 1);
        assert_eq!(st.alpha[0], outs[2].alpha_end);
        assert_eq!(st.alpha[1], outs[0].alpha_end);
        assert_eq!(st.beta[2], outs[0].beta_start);
        assert_eq!(st.beta[0], outs[1].beta_start);
    }

    proptest! {
        #[test]
        fn alpha_border_shift_invariance(seed in any::<u64>(), c in -50.0f64..50.0) {
            let t = trellis();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (ch, ap, a0, b0) = random_inputs(&mut rng, 5);
            let base = siso_window(&t, &ch, &ap, a0, b0, 1.0);
            let shifted = siso_window(&t, &ch, &ap, a0.map(|x| x + c), b0, 1.0);
            for (x, y) in base.extrinsic.iter().zip(&shifted.extrinsic) {
                for u in 0..3 {
                    prop_assert!((x[u] - y[u]).abs() <= 1e-9);
                }
            }
        }

        #[test]
        fn gamma_shift_invariance(seed in any::<u64>(), c in -20.0f64..20.0, k in 0usize..5) {
            let t = trellis();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (ch, ap, a0, b0) = random_inputs(&mut rng, 5);
            let mut gammas: Vec<[f64; 16]> = ch.iter().zip(&ap).map(|(&c, &a)| compute_gamma(c, a)).collect();
            let base = window_from_gammas(&t, &gammas, &ch, &ap, a0, b0, 1.0);
            gammas[k] = gammas[k].map(|g| g + c);
            let other = window_from_gammas(&t, &gammas, &ch, &ap, a0, b0, 1.0);
            for (x, y) in base.extrinsic.iter().zip(&other.extrinsic) {
                for u in 0..3 {
                    prop_assert!((x[u] - y[u]).abs() <= 1e-9);
                }
            }
        }

        #[test]
        fn reference_symbol_is_zero(seed in any::<u64>()) {
            let t = trellis();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (ch, ap, a0, b0) = random_inputs(&mut rng, 6);
            let out = siso_window(&t, &ch, &ap, a0, b0, 1.0);
            prop_assert!(out.app.iter().all(|m| m[0] == 0.0));
        }
    }
}
