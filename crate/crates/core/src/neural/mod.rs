//! A small neural-network substrate for the deep RL agents: a dense
//! rectified-linear MLP with hand-written backpropagation, Adam, and an
//! experience replay ring.

mod adam;
mod mlp;
mod replay;

pub use adam::{adam_step, AdamState};
pub use mlp::{clip_grad_norm, ForwardCache, Mlp};
pub use replay::{ReplayBuffer, Transition};

/// Hidden widths of the agents' networks.
pub const HIDDEN_LAYERS: [usize; 3] = [64, 512, 256];

/// `[input, 64, 512, 256, output]`.
pub fn agent_layer_sizes(input: usize, output: usize) -> Vec<usize> {
    let mut sizes = vec![input];
    sizes.extend_from_slice(&HIDDEN_LAYERS);
    sizes.push(output);
    sizes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::seeded_rng;
    use rand::Rng;

    /// Straightforward nested-vector reimplementation of the forward pass.
    fn reference_forward(net: &Mlp, x: &[f64]) -> Vec<f64> {
        let mut a = x.to_vec();
        for l in 0..net.n_layers() {
            let (w, b) = net.layer(l);
            let n_in = net.sizes()[l];
            let mut z: Vec<f64> = (0..net.sizes()[l + 1])
                .map(|o| b[o] + (0..n_in).map(|i| w[o * n_in + i] * a[i]).sum::<f64>())
                .collect();
            if l + 1 < net.n_layers() {
                z.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            a = z;
        }
        a
    }

    fn loss(net: &Mlp, x: &[f64], c: &[f64]) -> f64 {
        net.forward(x).unwrap().iter().zip(c).map(|(o, k)| o * k).sum()
    }

    #[test]
    fn zero_network_outputs_zero() {
        let net = Mlp::zeros(&agent_layer_sizes(5, 100)).unwrap();
        let out = net.forward(&[0.3, -0.1, 0.9, 0.2, 0.5]).unwrap();
        assert_eq!(out, vec![0.0; 100]);
    }

    #[test]
    fn single_layer_is_affine() {
        let mut net = Mlp::zeros(&[3, 2]).unwrap();
        net.set_layer(0, &[1.0, 2.0, 3.0, -1.0, 0.5, 0.25], &[0.1, -0.2]).unwrap();
        let out = net.forward(&[1.0, -1.0, 2.0]).unwrap();
        assert_eq!(out, vec![1.0 - 2.0 + 6.0 + 0.1, -1.0 - 0.5 + 0.5 - 0.2]);
    }

    #[test]
    fn forward_matches_reference() {
        let mut rng = seeded_rng(1);
        let net = Mlp::new(&[5, 16, 32, 8, 7], &mut rng).unwrap();
        for _ in 0..20 {
            let x: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let a = net.forward(&x).unwrap();
            let b = reference_forward(&net, &x);
            for (p, q) in a.iter().zip(&b) {
                assert!((p - q).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn input_size_is_checked() {
        let net = Mlp::zeros(&[3, 4, 2]).unwrap();
        assert!(net.forward(&[1.0]).is_err());
        let other = Mlp::zeros(&[3, 5, 2]).unwrap();
        let cache = other.forward_cached(&[0.0; 3]).unwrap();
        assert!(net.backward(&cache, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn backward_matches_finite_differences_on_every_parameter() {
        let mut rng = seeded_rng(2);
        for _ in 0..5 {
            let mut net = Mlp::new(&[5, 12, 9, 6, 4], &mut rng).unwrap();
            let x: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let c: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let cache = net.forward_cached(&x).unwrap();
            let grads = net.backward(&cache, &c).unwrap();
            let h = 1e-5;
            for k in 0..net.n_params() {
                let orig = net.params()[k];
                net.params_mut()[k] = orig + h;
                let up = loss(&net, &x, &c);
                net.params_mut()[k] = orig - h;
                let down = loss(&net, &x, &c);
                net.params_mut()[k] = orig;
                let fd = (up - down) / (2.0 * h);
                let rel = (fd - grads[k]).abs() / fd.abs().max(grads[k].abs()).max(1e-6);
                assert!(rel < 1e-4, "param {k}: fd {fd} vs {}", grads[k]);
            }
        }
    }

    #[test]
    fn dead_unit_has_zero_gradient() {
        let mut net = Mlp::zeros(&[2, 2, 1]).unwrap();
        // unit 1 has a large negative bias and never activates
        net.set_layer(0, &[1.0, 1.0, 1.0, 1.0], &[0.0, -100.0]).unwrap();
        net.set_layer(1, &[1.0, 1.0], &[0.0]).unwrap();
        let cache = net.forward_cached(&[0.5, 0.25]).unwrap();
        let g = net.backward(&cache, &[1.0]).unwrap();
        // layer 0 row 1 weights, bias 1; layer 1 weight on unit 1
        assert_eq!(&g[2..4], &[0.0, 0.0]);
        assert_eq!(g[5], 0.0);
        assert_eq!(g[7], 0.0);
        assert!(g[0] != 0.0);
    }

    #[test]
    fn gradient_is_linear_in_upstream() {
        let mut rng = seeded_rng(3);
        let net = Mlp::new(&[5, 8, 3], &mut rng).unwrap();
        let cache = net.forward_cached(&[0.1, 0.2, 0.3, 0.4, 0.5]).unwrap();
        let g1 = net.backward(&cache, &[1.0, -2.0, 0.5]).unwrap();
        let g3 = net.backward(&cache, &[3.0, -6.0, 1.5]).unwrap();
        for (a, b) in g1.iter().zip(&g3) {
            assert!((3.0 * a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn seeded_init_is_deterministic_and_bounded() {
        let a = Mlp::new(&[5, 64, 3], &mut seeded_rng(7)).unwrap();
        let b = Mlp::new(&[5, 64, 3], &mut seeded_rng(7)).unwrap();
        assert_eq!(a, b);
        let (w0, _) = a.layer(0);
        assert!(w0.iter().all(|w| w.abs() <= 1.0 / 5f64.sqrt()));
        let (w1, _) = a.layer(1);
        assert!(w1.iter().all(|w| w.abs() <= 1.0 / 8.0));
    }

    #[test]
    fn clipping_bounds_norm() {
        let mut g = vec![3.0, 4.0];
        assert_eq!(clip_grad_norm(&mut g, 1.0), 5.0);
        assert!((g[0] - 0.6).abs() < 1e-15 && (g[1] - 0.8).abs() < 1e-15);
        let mut small = vec![0.1];
        clip_grad_norm(&mut small, 1.0);
        assert_eq!(small, vec![0.1]);
    }
}
