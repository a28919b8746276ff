use ndarray::{Array1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// `l_i = (1/N) sum_j ||X_j - Y_i||_2` for every row `Y_i`.
pub fn pairwise_set_distance(x: ArrayView2<f64>, y: ArrayView2<f64>) -> Result<Array1<f64>> {
    check(&x, &y)?;
    let n = x.nrows() as f64;
    Ok(y
        .rows()
        .into_iter()
        .map(|yi| x.rows().into_iter().map(|xj| l2(xj.iter(), yi.iter())).sum::<f64>() / n)
        .collect())
}

/// Within-set variant: row `i` is compared to every other row, divisor
/// `N - 1`.
pub fn self_set_distance(x: ArrayView2<f64>) -> Result<Array1<f64>> {
    let n = x.nrows();
    if n < 2 {
        return Err(Error::Validation(
            "self distance needs at least two samples".into(),
        ));
    }
    Ok((0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i)
                .map(|j| l2(x.row(j).iter(), x.row(i).iter()))
                .sum::<f64>()
                / (n - 1) as f64
        })
        .collect())
}

fn l2<'a>(a: impl Iterator<Item = &'a f64>, b: impl Iterator<Item = &'a f64>) -> f64 {
    a.zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt()
}

fn check(x: &ArrayView2<f64>, y: &ArrayView2<f64>) -> Result<()> {
    if x.nrows() == 0 {
        return Err(Error::Validation("reference set is empty".into()));
    }
    if x.ncols() != y.ncols() {
        return Err(Error::Shape(format!(
            "feature widths differ: {} vs {}",
            x.ncols(),
            y.ncols()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// Mean and population standard deviation.
    pub fn of(values: &Array1<f64>) -> Self {
        Self {
            mean: values.mean().unwrap_or(f64::NAN),
            std: values.std(0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassDistances {
    pub class: usize,
    pub baseline: MeanStd,
    pub gan: Option<MeanStd>,
    pub random: MeanStd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceReport {
    pub classes: Vec<ClassDistances>,
}

/// Per class: real-vs-real (self pair excluded), real-vs-generated and
/// real-vs-random distance statistics. `generated_by_class` may be absent.
pub fn distance_report(
    real_by_class: &[ArrayView2<f64>],
    generated_by_class: Option<&[ArrayView2<f64>]>,
    random_by_class: &[ArrayView2<f64>],
) -> Result<DistanceReport> {
    if random_by_class.len() != real_by_class.len()
        || generated_by_class.is_some_and(|g| g.len() != real_by_class.len())
    {
        return Err(Error::Shape("per-class inputs have different class counts".into()));
    }
    let classes = real_by_class
        .iter()
        .enumerate()
        .map(|(c, real)| {
            Ok(ClassDistances {
                class: c,
                baseline: MeanStd::of(&self_set_distance(real.view())?),
                gan: generated_by_class
                    .map(|g| pairwise_set_distance(real.view(), g[c].view()).map(|d| MeanStd::of(&d)))
                    .transpose()?,
                random: MeanStd::of(&pairwise_set_distance(real.view(), random_by_class[c].view())?),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DistanceReport { classes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};
    use rand::Rng;

    fn brute(x: &Array2<f64>, y: &Array2<f64>) -> Vec<f64> {
        let mut out = vec![0.0; y.nrows()];
        for i in 0..y.nrows() {
            let mut total = 0.0;
            for j in 0..x.nrows() {
                let mut ss = 0.0;
                for k in 0..x.ncols() {
                    let d = x[[j, k]] - y[[i, k]];
                    ss += d * d;
                }
                total += ss.sqrt();
            }
            out[i] = total / x.nrows() as f64;
        }
        out
    }

    #[test]
    fn analytic_cases() {
        let x = array![[1.0, 2.0]];
        assert_eq!(pairwise_set_distance(x.view(), x.view()).unwrap()[0], 0.0);
        let x = array![[0.0, 0.0], [2.0, 0.0]];
        let y = array![[1.0, 0.0]];
        assert_eq!(pairwise_set_distance(x.view(), y.view()).unwrap()[0], 1.0);
    }

    #[test]
    fn random_matches_double_loop() {
        let mut rng = crate::rng::rng_for(9, 0);
        let x = Array2::from_shape_simple_fn((5, 3), || rng.random_range(-2.0..2.0));
        let y = Array2::from_shape_simple_fn((4, 3), || rng.random_range(-2.0..2.0));
        let d = pairwise_set_distance(x.view(), y.view()).unwrap();
        for (a, b) in d.iter().zip(brute(&x, &y)) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn errors() {
        let x = Array2::<f64>::zeros((0, 2));
        let y = Array2::<f64>::zeros((1, 2));
        assert!(pairwise_set_distance(x.view(), y.view()).is_err());
        let x = Array2::<f64>::zeros((1, 3));
        assert!(matches!(pairwise_set_distance(x.view(), y.view()), Err(Error::Shape(_))));
    }

    #[test]
    fn self_distance_excludes_self_pair() {
        let x = array![[0.0], [2.0], [4.0]];
        let d = self_set_distance(x.view()).unwrap();
        assert_eq!(d.to_vec(), vec![3.0, 2.0, 3.0]);
    }

    #[test]
    fn generated_equal_real_reproduces_nonself_means() {
        let real = array![[0.0, 1.0], [1.0, 1.0], [3.0, 0.0]];
        let random = array![[5.0, 5.0]];
        let r = distance_report(&[real.view()], Some(&[real.view()]), &[random.view()]).unwrap();
        let c = &r.classes[0];
        // with the self pair included (divisor N) the mean shrinks by (N-1)/N
        let gan = c.gan.unwrap();
        assert!((gan.mean - c.baseline.mean * 2.0 / 3.0).abs() < 1e-12);
        assert!(c.random.mean > c.baseline.mean);
        let without = distance_report(&[real.view()], None, &[random.view()]).unwrap();
        assert!(without.classes[0].gan.is_none());
    }
}
