use crate::class::{ObjectClass, CLASS_COUNT, FOREGROUND_COUNT};
use crate::error::{Error, Result};
use crate::render::LabelFrame;

/// Pixel counts; rows are ground truth, columns predictions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfusionMatrix {
    classes: usize,
    counts: Vec<u64>,
}

impl Default for ConfusionMatrix {
    fn default() -> Self {
        Self::new(CLASS_COUNT)
    }
}

impl ConfusionMatrix {
    pub fn new(classes: usize) -> Self {
        Self { classes, counts: vec![0; classes * classes] }
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn get(&self, truth: usize, pred: usize) -> u64 {
        self.counts[truth * self.classes + pred]
    }

    pub fn add(&mut self, truth: usize, pred: usize, n: u64) {
        self.counts[truth * self.classes + pred] += n;
    }

    pub fn row_sum(&self, truth: usize) -> u64 {
        self.counts[truth * self.classes..(truth + 1) * self.classes].iter().sum()
    }

    pub fn col_sum(&self, pred: usize) -> u64 {
        (0..self.classes).map(|t| self.get(t, pred)).sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn accumulate(&mut self, truth: &LabelFrame, pred: &[u8]) -> Result<()> {
        if truth.labels.len() != pred.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} predictions for a {}x{} frame",
                pred.len(),
                truth.width,
                truth.height
            )));
        }
        for (&t, &p) in truth.labels.iter().zip(pred) {
            if t as usize >= self.classes || p as usize >= self.classes {
                return Err(Error::InvalidParameter(format!("label pair ({t}, {p}) out of range")));
            }
            self.counts[t as usize * self.classes + p as usize] += 1;
        }
        Ok(())
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) -> Result<()> {
        if other.classes != self.classes {
            return Err(Error::DimensionMismatch("confusion matrices differ in size".into()));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricsReport {
    pub recall: Vec<f64>,
    pub precision: Vec<f64>,
    pub f1: Vec<f64>,
    /// Classes that occur in the ground truth or the predictions.
    pub present: Vec<bool>,
    pub mean_recall: f64,
    pub mean_precision: f64,
    pub mean_f1: f64,
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 { 0.0 } else { a as f64 / b as f64 }
}

/// Per-class scores, with macro means over the foreground classes that are
/// present. Background never enters the means.
pub fn report(cm: &ConfusionMatrix) -> MetricsReport {
    let c = cm.classes();
    let mut r = MetricsReport {
        recall: vec![0.0; c],
        precision: vec![0.0; c],
        f1: vec![0.0; c],
        present: vec![false; c],
        mean_recall: 0.0,
        mean_precision: 0.0,
        mean_f1: 0.0,
    };
    for k in 0..c {
        let tp = cm.get(k, k);
        let (rows, cols) = (cm.row_sum(k), cm.col_sum(k));
        r.recall[k] = ratio(tp, rows);
        r.precision[k] = ratio(tp, cols);
        let s = r.recall[k] + r.precision[k];
        r.f1[k] = if s > 0.0 { 2.0 * r.recall[k] * r.precision[k] / s } else { 0.0 };
        r.present[k] = rows > 0 || cols > 0;
    }
    let fg: Vec<usize> = (0..c.min(FOREGROUND_COUNT)).filter(|&k| r.present[k]).collect();
    if !fg.is_empty() {
        let n = fg.len() as f64;
        r.mean_recall = fg.iter().map(|&k| r.recall[k]).sum::<f64>() / n;
        r.mean_precision = fg.iter().map(|&k| r.precision[k]).sum::<f64>() / n;
        r.mean_f1 = fg.iter().map(|&k| r.f1[k]).sum::<f64>() / n;
    }
    r
}

impl MetricsReport {
    /// Tab-separated per-class table followed by the macro means.
    pub fn to_tsv(&self) -> String {
        let mut s = String::from("class\trecall\tprecision\tf1\tpresent\n");
        for k in 0..self.recall.len() {
            let name = ObjectClass::from_id(k as u8).map_or_else(|| k.to_string(), |c| c.name().to_string());
            s += &format!(
                "{name}\t{:.6}\t{:.6}\t{:.6}\t{}\n",
                self.recall[k], self.precision[k], self.f1[k], self.present[k]
            );
        }
        s += &format!("mean\t{:.6}\t{:.6}\t{:.6}\t\n", self.mean_recall, self.mean_precision, self.mean_f1);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn frame(labels: &[u8]) -> LabelFrame {
        LabelFrame { width: labels.len(), height: 1, labels: labels.to_vec() }
    }

    #[test]
    fn perfect_prediction_is_diagonal() {
        let l = [0u8, 1, 2, 2, 10, 9];
        let mut cm = ConfusionMatrix::default();
        cm.accumulate(&frame(&l), &l).unwrap();
        for t in 0..CLASS_COUNT {
            for p in 0..CLASS_COUNT {
                assert_eq!(cm.get(t, p) > 0, t == p && l.contains(&(t as u8)));
            }
        }
        let r = report(&cm);
        assert_eq!((r.mean_recall, r.mean_precision, r.mean_f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn single_off_diagonal_cell() {
        let mut cm = ConfusionMatrix::default();
        cm.accumulate(&frame(&[0; 5]), &[1; 5]).unwrap();
        assert_eq!(cm.get(0, 1), 5);
        assert_eq!(cm.total(), 5);
    }

    #[test]
    fn two_by_two_hand_tally() {
        let truth = LabelFrame { width: 2, height: 2, labels: vec![0, 1, 1, 4] };
        let mut cm = ConfusionMatrix::default();
        cm.accumulate(&truth, &[0, 1, 4, 4]).unwrap();
        assert_eq!((cm.get(0, 0), cm.get(1, 1), cm.get(1, 4), cm.get(4, 4)), (1, 1, 1, 1));
        assert_eq!(cm.total(), 4);
    }

    #[test]
    fn binary_closed_form() {
        let mut cm = ConfusionMatrix::new(2);
        cm.add(0, 0, 8);
        cm.add(0, 1, 2);
        cm.add(1, 0, 1);
        cm.add(1, 1, 9);
        let r = report(&cm);
        assert!((r.recall[0] - 0.8).abs() < 1e-12 && (r.recall[1] - 0.9).abs() < 1e-12);
        assert!((r.precision[0] - 8.0 / 9.0).abs() < 1e-12 && (r.precision[1] - 9.0 / 11.0).abs() < 1e-12);
        let p = 8.0 / 9.0;
        assert!((r.f1[0] - 2.0 * 0.8 * p / (0.8 + p)).abs() < 1e-12);
    }

    #[test]
    fn absent_classes_and_background_excluded() {
        let mut cm = ConfusionMatrix::default();
        // head perfect, background badly confused with body
        cm.add(0, 0, 10);
        cm.add(10, 10, 1);
        cm.add(10, 1, 5);
        let r = report(&cm);
        assert!(!r.present[3] && r.present[1]);
        // head (1.0) and body (recall 0 precision 0) enter; background does not
        assert!((r.mean_recall - 0.5).abs() < 1e-12);
    }

    #[test]
    fn mismatched_sizes_rejected() {
        let mut cm = ConfusionMatrix::default();
        assert!(cm.accumulate(&frame(&[0, 1]), &[0]).is_err());
        assert!(cm.merge(&ConfusionMatrix::new(3)).is_err());
    }

    proptest! {
        #[test]
        fn accumulate_is_order_independent(pairs in proptest::collection::vec((0u8..11, 0u8..11), 0..200), cut in 0usize..200) {
            let (t, p): (Vec<u8>, Vec<u8>) = pairs.iter().copied().unzip();
            let cut = cut.min(t.len());
            let mut whole = ConfusionMatrix::default();
            whole.accumulate(&frame(&t), &p).unwrap();
            let mut a = ConfusionMatrix::default();
            a.accumulate(&frame(&t[cut..]), &p[cut..]).unwrap();
            let mut b = ConfusionMatrix::default();
            b.accumulate(&frame(&t[..cut]), &p[..cut]).unwrap();
            a.merge(&b).unwrap();
            prop_assert_eq!(&a, &whole);
            for k in 0..CLASS_COUNT {
                prop_assert_eq!(whole.row_sum(k), t.iter().filter(|&&x| x as usize == k).count() as u64);
            }
            let r = report(&whole);
            for k in 0..CLASS_COUNT {
                prop_assert!((0.0..=1.0).contains(&r.f1[k]));
            }
        }
    }
}
