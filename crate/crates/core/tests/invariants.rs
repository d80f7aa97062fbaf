use bqhl::algebra::{
    approx_eq, matrix_a, matrix_b, ray_angle, symmetry_a, symmetry_b, theta, Mat3, C64, OMEGA, ONE,
};
use bqhl::grid::{first_derivative, second_derivative, UniformGrid};
use bqhl::lax::{build_u, build_v, FieldPoint};
use bqhl::reflection::{ray_of, RaySamples, SpectralDataSet};
use bqhl::rh::{gauss_legendre, jump_matrix, FieldRow};
use proptest::prelude::*;

fn complex(r: f64) -> impl Strategy<Value = C64> {
    (-r..r, -r..r).prop_map(|(a, b)| C64::new(a, b))
}

fn matrix() -> impl Strategy<Value = Mat3> {
    prop::collection::vec(complex(3.0), 9).prop_map(Mat3::from_iterator)
}

/// Spectral point away from the origin.
fn spectral_point() -> impl Strategy<Value = C64> {
    (0.1f64..3.0, 0.0..std::f64::consts::TAU).prop_map(|(r, a)| C64::from_polar(r, a))
}

fn field_point() -> impl Strategy<Value = FieldPoint> {
    (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
        .prop_map(|(u, v, ux, uxx, vx)| FieldPoint { u, v, ux, uxx, vx })
}

/// `(r₁, r₂, r₃, r₄)` with `|r₁|, |r₂| < 1`.
fn coefficients() -> impl Strategy<Value = [C64; 4]> {
    (complex(0.7), complex(0.7), complex(1.0), complex(1.0)).prop_map(|(a, b, c, d)| [a, b, c, d])
}

proptest! {
    #[test]
    fn symmetry_maps_have_orders_three_and_two(f in matrix()) {
        let a3 = symmetry_a(&symmetry_a(&symmetry_a(&f)));
        prop_assert!(approx_eq(&a3, &f, 1e-12));
        prop_assert!(approx_eq(&symmetry_b(&symmetry_b(&f)), &f, 1e-12));
        prop_assert!(approx_eq(&(matrix_a() * matrix_a().transpose()), &Mat3::identity(), 1e-15));
    }

    #[test]
    fn theta_is_additive_and_antisymmetric(x in 0.0f64..10.0, t in 0.0f64..2.0, k in spectral_point()) {
        for (i, j, l) in [(1, 2, 3), (2, 3, 1), (3, 1, 2)] {
            let sum = theta(i, j, x, t, k) + theta(j, l, x, t, k);
            prop_assert!((sum - theta(i, l, x, t, k)).norm() <= 1e-12 * (1.0 + sum.norm()));
            prop_assert!((theta(i, j, x, t, k) + theta(j, i, x, t, k)).norm() <= 1e-12);
        }
    }

    #[test]
    fn lax_matrices_are_covariant(p in field_point(), k in spectral_point()) {
        let (a, b) = (matrix_a(), matrix_b());
        for build in [build_u, build_v] {
            let m = build(&p, k).unwrap();
            let scale = 1.0 + m.iter().map(|z| z.norm()).fold(0.0, f64::max);
            prop_assert!(approx_eq(&build(&p, OMEGA * k).unwrap(), &(a.transpose() * m * a), 1e-12 * scale));
            prop_assert!(approx_eq(&build(&p, k.conj()).unwrap(), &(b * m.map(|z| z.conj()) * b), 1e-12 * scale));
            prop_assert!(m.trace().norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn jumps_are_unimodular_and_symmetric(
        a in coefficients(),
        x in 0.0f64..5.0,
        t in 0.0f64..1.0,
        rho in 0.05f64..1.5,
    ) {
        let b = matrix_b();
        for n in 1..=12 {
            let k = C64::from_polar(rho, ray_angle(n));
            let v = jump_matrix(n, k, x, t, &a);
            let scale = v.iter().map(|z| z.norm()).fold(1.0, f64::max).powi(3);
            prop_assert!((v.determinant() - ONE).norm() <= 1e-12 * scale, "det on ray {}", n);
            let va = jump_matrix(((n + 3) % 12) + 1, OMEGA * k, x, t, &a);
            prop_assert!(approx_eq(&v, &symmetry_a(&va), 1e-12 * scale));
            let vb = jump_matrix(((12 - (n - 1)) % 12) + 1, k.conj(), x, t, &a);
            let vb = b * vb.map(|z| z.conj()).try_inverse().unwrap() * b;
            prop_assert!(approx_eq(&v, &vb, 1e-10 * scale));
        }
    }

    #[test]
    fn stencils_differentiate_cubics(c in prop::array::uniform4(-2.0f64..2.0), len in 12usize..60) {
        let g = UniformGrid::new(-1.0, 1.5, len).unwrap();
        let p = |x: f64| c[0] + c[1] * x + c[2] * x * x + c[3] * x.powi(3);
        let f: Vec<f64> = g.points().into_iter().map(p).collect();
        let (d1, d2) = (first_derivative(&f, g.step), second_derivative(&f, g.step));
        for (i, x) in g.points().into_iter().enumerate() {
            prop_assert!((d1[i] - (c[1] + 2.0 * c[2] * x + 3.0 * c[3] * x * x)).abs() < 1e-8);
            prop_assert!((d2[i] - (2.0 * c[2] + 6.0 * c[3] * x)).abs() < 1e-6);
        }
    }

    #[test]
    fn gauss_legendre_is_exact_to_degree_2n_minus_1(n in 2usize..20, c in prop::collection::vec(-1.0f64..1.0, 40)) {
        let (xs, ws) = gauss_legendre(n);
        let deg = 2 * n - 1;
        let quad: f64 = xs.iter().zip(&ws).map(|(&x, &w)| w * (0..=deg).map(|m| c[m] * x.powi(m as i32)).sum::<f64>()).sum();
        let exact: f64 = (0..=deg).step_by(2).map(|m| 2.0 * c[m] / (m + 1) as f64).sum();
        prop_assert!((quad - exact).abs() < 1e-12);
    }

    #[test]
    fn dataset_json_round_trips_exactly(
        values in prop::collection::vec(complex(1.0), 4 * 5),
        radii in prop::collection::vec(0.05f64..40.0, 5),
    ) {
        let d = SpectralDataSet {
            t_end: 1.0,
            k_max: 40.0,
            rays: (1..=4)
                .map(|j| RaySamples {
                    j,
                    ray: ray_of(j),
                    nodes: radii.iter().map(|&r| C64::from_polar(r, ray_angle(ray_of(j)))).collect(),
                    values: values[5 * (j - 1)..5 * j].to_vec(),
                    tail: None,
                    tail_error: None,
                    origin: None,
                })
                .collect(),
            assumptions: None,
        };
        let back = SpectralDataSet::from_json(&d.to_json().unwrap()).unwrap();
        for (r, s) in d.rays.iter().zip(&back.rays) {
            prop_assert_eq!(&r.values, &s.values);
            prop_assert_eq!(&r.nodes, &s.nodes);
        }
    }

    #[test]
    fn field_csv_round_trips_exactly(u in -1.0f64..1.0, v in -1.0f64..1.0, res in 0.0f64..1e-6) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let row = FieldRow { x: 1.0 / 3.0, t: 0.1, u, v, u_imag: 0.0, v_imag: 0.0, jump_residual: res, cond_estimate: 7.0 };
        bqhl::io::write_fields(&path, &[row]).unwrap();
        prop_assert_eq!(bqhl::io::read_fields(&path).unwrap()[0], row);
    }
}
