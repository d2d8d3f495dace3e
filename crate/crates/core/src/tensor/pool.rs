use super::{Result, Tensor, TensorError};
use crate::Real;

/// Flat input index of the maximum of each pooling window, in output order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoolIndices {
    pub input_shape: Vec<usize>,
    pub argmax: Vec<usize>,
}

/// 2×2 max pooling with stride 2 over disjoint windows.
///
/// Ties go to the first element in row-major order within the window.
pub fn maxpool2x2<T: Real>(input: &Tensor<T>) -> Result<(Tensor<T>, PoolIndices)> {
    let [n, c, h, w] = input.dims4("maxpool2x2")?;
    if h % 2 != 0 || w % 2 != 0 {
        return Err(TensorError::OddSpatial {
            height: h,
            width: w,
        });
    }
    let (oh, ow) = (h / 2, w / 2);
    let x = input.data();
    let mut out = Vec::with_capacity(n * c * oh * ow);
    let mut argmax = Vec::with_capacity(n * c * oh * ow);
    for plane in 0..n * c {
        let base = plane * h * w;
        for oy in 0..oh {
            for ox in 0..ow {
                let top = base + 2 * oy * w + 2 * ox;
                let mut best = top;
                for cand in [top + 1, top + w, top + w + 1] {
                    if x[cand] > x[best] {
                        best = cand;
                    }
                }
                out.push(x[best]);
                argmax.push(best);
            }
        }
    }
    Ok((
        Tensor::new(vec![n, c, oh, ow], out)?,
        PoolIndices {
            input_shape: input.shape().to_vec(),
            argmax,
        },
    ))
}

/// Routes each upstream gradient to the input position that won its window.
pub fn maxpool2x2_backward<T: Real>(
    upstream: &Tensor<T>,
    indices: &PoolIndices,
) -> Result<Tensor<T>> {
    if upstream.len() != indices.argmax.len() {
        return Err(TensorError::DataLength {
            shape: upstream.shape().to_vec(),
            expected: indices.argmax.len(),
            found: upstream.len(),
        });
    }
    let mut grad = Tensor::zeros(&indices.input_shape);
    let g = grad.data_mut();
    for (&idx, &u) in indices.argmax.iter().zip(upstream.data()) {
        g[idx] += u;
    }
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_image_halves() {
        let x = Tensor::<f32>::full(&[1, 2, 4, 6], 0.25);
        let (y, idx) = maxpool2x2(&x).unwrap();
        assert_eq!(y.shape(), &[1, 2, 2, 3]);
        assert!(y.data().iter().all(|&v| v == 0.25));
        // ties resolve to the top-left element of each window
        assert_eq!(idx.argmax[0], 0);
        assert_eq!(idx.argmax[1], 2);
    }

    #[test]
    fn window_maxima_match_brute_force() {
        #[rustfmt::skip]
        let data = vec![
            1.0, 5.0, 2.0, 0.0,
            3.0, 4.0, 8.0, 7.0,
            9.0, 6.0, 11.0, 15.0,
            10.0, 12.0, 14.0, 13.0,
        ];
        let x = Tensor::<f64>::new(vec![1, 1, 4, 4], data.clone()).unwrap();
        let (y, _) = maxpool2x2(&x).unwrap();
        let brute: Vec<f64> = (0..2)
            .flat_map(|oy| (0..2).map(move |ox| (oy, ox)))
            .map(|(oy, ox)| {
                let mut m = f64::NEG_INFINITY;
                for dy in 0..2 {
                    for dx in 0..2 {
                        m = m.max(data[(2 * oy + dy) * 4 + 2 * ox + dx]);
                    }
                }
                m
            })
            .collect();
        assert_eq!(y.data(), brute.as_slice());
        assert_eq!(y.data(), &[5.0, 8.0, 12.0, 15.0]);
    }

    #[test]
    fn odd_dims_rejected() {
        let x = Tensor::<f32>::zeros(&[1, 1, 3, 4]);
        assert_eq!(
            maxpool2x2(&x).unwrap_err(),
            TensorError::OddSpatial {
                height: 3,
                width: 4
            }
        );
    }

    #[test]
    fn backward_routes_only_to_argmax() {
        let x = Tensor::<f64>::from_fn(&[1, 1, 4, 4], |i| ((i * 7) % 16) as f64);
        let (_, idx) = maxpool2x2(&x).unwrap();
        let up = Tensor::<f64>::new(vec![1, 1, 2, 2], vec![1.0, -2.0, 3.0, 0.5]).unwrap();
        let g = maxpool2x2_backward(&up, &idx).unwrap();
        for (i, &v) in g.data().iter().enumerate() {
            if !idx.argmax.contains(&i) {
                assert_eq!(v, 0.0);
            }
        }
        assert!((g.sum() - up.sum()).abs() < 1e-12);
    }
}
