//! Baseline mutation detector: hashed character and word n-grams fed to an
//! L2-regularized logistic regression trained by plain SGD.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dataset::{DatasetBundle, Label, LabeledExample, TextMode};
use crate::io::write_atomic;
use crate::rng::{fnv1a, mix64, SeedStream};

pub const DEFAULT_DIM: usize = 1 << 18;
pub const MODEL_MAGIC: &[u8; 8] = b"TXMUTMDL";
pub const MODEL_VERSION: u32 = 1;
const HASH_SALT: u64 = 0x7465_7874_6d75_7401;

#[derive(Debug, Error)]
pub enum DetectorError {
    #[error("training data has no examples")]
    Empty,
    #[error("training data holds only {0:?} examples")]
    SingleLabel(Label),
    #[error("invalid hyperparameters: {0}")]
    Config(String),
    #[error("model file: {0}")]
    Format(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub dim: usize,
    pub learning_rate: f64,
    pub epochs: u32,
    pub l2: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            dim: DEFAULT_DIM,
            learning_rate: 0.1,
            epochs: 5,
            l2: 1e-6,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<(), DetectorError> {
        if self.dim < 2 || self.dim > u32::MAX as usize {
            return Err(DetectorError::Config(format!("dim must be in 2..=2^32-1, got {}", self.dim)));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(DetectorError::Config(format!("learning_rate must be positive, got {}", self.learning_rate)));
        }
        if self.epochs == 0 {
            return Err(DetectorError::Config("epochs must be at least 1".into()));
        }
        if !(self.l2.is_finite() && self.l2 >= 0.0) {
            return Err(DetectorError::Config(format!("l2 must be non-negative, got {}", self.l2)));
        }
        Ok(())
    }
}

/// Unhashed feature keys of `text`: character 1- to 3-grams (`c1:`, `c2:`,
/// `c3:`) over the raw characters and `<token>` unigrams (`w:`) over
/// whitespace-separated tokens.
pub fn ngrams(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    for n in 1..=3 {
        for win in chars.windows(n) {
            let mut key = format!("c{n}:");
            key.extend(win);
            out.push(key);
        }
    }
    for tok in text.split_whitespace() {
        out.push(format!("w:<{tok}>"));
    }
    out
}

/// Feature slot of a key; slot 0 is reserved for the bias.
pub fn hash_index(key: &str, dim: usize) -> usize {
    let h = mix64(fnv1a(key.as_bytes()) ^ HASH_SALT);
    1 + (h % (dim as u64 - 1)) as usize
}

/// Sparse counts, sorted by index, with the bias term included.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub entries: Vec<(u32, f32)>,
}

impl FeatureVector {
    pub fn dot(&self, w: &[f32]) -> f64 {
        self.entries.iter().map(|&(i, x)| w[i as usize] as f64 * x as f64).sum()
    }
}

pub fn featurize(text: &str, dim: usize) -> FeatureVector {
    let mut idx: Vec<u32> = ngrams(text).iter().map(|k| hash_index(k, dim) as u32).collect();
    idx.push(0);
    idx.sort_unstable();
    let mut entries: Vec<(u32, f32)> = Vec::with_capacity(idx.len());
    for i in idx {
        match entries.last_mut() {
            Some((j, c)) if *j == i => *c += 1.0,
            _ => entries.push((i, 1.0)),
        }
    }
    FeatureVector { entries }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn target(label: Label) -> f64 {
    match label {
        Label::Human => 0.0,
        Label::Mutation => 1.0,
    }
}

/// Mean logistic loss plus `l2/2 * |w|^2`, and its gradient. Dense and slow;
/// meant for checking the update rule on small problems.
pub fn loss_and_gradient(w: &[f64], data: &[(FeatureVector, f64)], l2: f64) -> (f64, Vec<f64>) {
    let n = data.len().max(1) as f64;
    let mut loss = 0.0;
    let mut grad: Vec<f64> = w.iter().map(|wi| l2 * wi).collect();
    for (x, y) in data {
        let z: f64 = x.entries.iter().map(|&(i, c)| w[i as usize] * c as f64).sum();
        loss += (softplus(z) - y * z) / n;
        let g = sigmoid(z) - y;
        for &(i, c) in &x.entries {
            grad[i as usize] += g * c as f64 / n;
        }
    }
    loss += 0.5 * l2 * w.iter().map(|v| v * v).sum::<f64>();
    (loss, grad)
}

/// Dense weights with a lazy multiplicative scale, so the L2 shrink of
/// every step costs O(1) instead of O(dim).
struct ScaledWeights {
    v: Vec<f64>,
    scale: f64,
}

impl ScaledWeights {
    fn dot(&self, x: &FeatureVector) -> f64 {
        self.scale * x.entries.iter().map(|&(i, c)| self.v[i as usize] * c as f64).sum::<f64>()
    }

    /// `w <- w * (1 - lr*l2) - lr*g*x`
    fn step(&mut self, x: &FeatureVector, g: f64, lr: f64, l2: f64) {
        self.scale *= 1.0 - lr * l2;
        if self.scale < 1e-6 {
            for v in &mut self.v {
                *v *= self.scale;
            }
            self.scale = 1.0;
        }
        let k = lr * g / self.scale;
        for &(i, c) in &x.entries {
            self.v[i as usize] -= k * c as f64;
        }
    }

    fn into_weights(self) -> Vec<f32> {
        self.v.into_iter().map(|v| (v * self.scale) as f32).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelManifest {
    pub seed: u64,
    pub hyperparams: Hyperparams,
    pub train_examples: usize,
    pub train_accuracy: f64,
    pub mode: Option<TextMode>,
    /// Checksum of the bundle the model was trained on.
    pub dataset_checksum: Option<String>,
    /// Checksum of the caption corpus behind that bundle.
    pub corpus_checksum: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineModel {
    pub weights: Vec<f32>,
    pub manifest: ModelManifest,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub label: Label,
    /// Probability of Mutation.
    pub score: f64,
}

/// Trains over `epochs` seeded shuffles of the data; epoch `t` (from 1)
/// uses learning rate `lr / sqrt(t)`.
pub fn train_baseline(examples: &[LabeledExample], hp: &Hyperparams, seed: u64) -> Result<BaselineModel, DetectorError> {
    hp.validate()?;
    let first = examples.first().ok_or(DetectorError::Empty)?.label;
    if examples.iter().all(|e| e.label == first) {
        return Err(DetectorError::SingleLabel(first));
    }
    let data: Vec<(FeatureVector, f64)> = examples
        .par_iter()
        .map(|e| (featurize(&e.text, hp.dim), target(e.label)))
        .collect();
    let mut w = ScaledWeights {
        v: vec![0.0; hp.dim],
        scale: 1.0,
    };
    let root = SeedStream::new(seed).fork("train");
    let mut order: Vec<usize> = (0..data.len()).collect();
    for epoch in 0..hp.epochs {
        root.fork(&format!("epoch{epoch}")).shuffle(&mut order);
        let lr = hp.learning_rate / ((epoch + 1) as f64).sqrt();
        for &i in &order {
            let (x, y) = &data[i];
            let g = sigmoid(w.dot(x)) - y;
            w.step(x, g, lr, hp.l2);
        }
    }
    let weights = w.into_weights();
    let correct = data
        .iter()
        .filter(|(x, y)| (sigmoid(x.dot(&weights)) >= 0.5) == (*y == 1.0))
        .count();
    Ok(BaselineModel {
        weights,
        manifest: ModelManifest {
            seed,
            hyperparams: *hp,
            train_examples: data.len(),
            train_accuracy: correct as f64 / data.len() as f64,
            mode: None,
            dataset_checksum: None,
            corpus_checksum: None,
            run: None,
        },
    })
}

/// Trains on a bundle's train split and records where it came from.
pub fn train_from_bundle(bundle: &DatasetBundle, hp: &Hyperparams, seed: u64) -> Result<BaselineModel, DetectorError> {
    let mut model = train_baseline(&bundle.train, hp, seed)?;
    model.manifest.mode = Some(bundle.manifest.mode);
    model.manifest.dataset_checksum = Some(bundle.manifest.checksum.clone());
    model.manifest.corpus_checksum = Some(bundle.manifest.corpus_checksum.clone());
    Ok(model)
}

impl BaselineModel {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// Mutation when the score is at least 0.5.
    pub fn predict(&self, text: &str) -> Prediction {
        let score = sigmoid(featurize(text, self.dim()).dot(&self.weights));
        Prediction {
            label: if score >= 0.5 { Label::Mutation } else { Label::Human },
            score,
        }
    }

    /// Binary layout, all little-endian: magic, version u32, dim u32,
    /// learning_rate f64, epochs u32, l2 f64, seed u64, dim f32 weights,
    /// manifest length u32, manifest JSON.
    pub fn to_bytes(&self) -> Vec<u8> {
        let hp = &self.manifest.hyperparams;
        let manifest = serde_json::to_vec(&self.manifest).expect("serializable");
        let mut b = Vec::with_capacity(48 + 4 * self.weights.len() + manifest.len());
        b.extend_from_slice(MODEL_MAGIC);
        b.extend_from_slice(&MODEL_VERSION.to_le_bytes());
        b.extend_from_slice(&(self.weights.len() as u32).to_le_bytes());
        b.extend_from_slice(&hp.learning_rate.to_le_bytes());
        b.extend_from_slice(&hp.epochs.to_le_bytes());
        b.extend_from_slice(&hp.l2.to_le_bytes());
        b.extend_from_slice(&self.manifest.seed.to_le_bytes());
        for w in &self.weights {
            b.extend_from_slice(&w.to_le_bytes());
        }
        b.extend_from_slice(&(manifest.len() as u32).to_le_bytes());
        b.extend_from_slice(&manifest);
        b
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, DetectorError> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8)? != MODEL_MAGIC {
            return Err(DetectorError::Format("bad magic".into()));
        }
        let version = r.u32()?;
        if version != MODEL_VERSION {
            return Err(DetectorError::Format(format!("unsupported version {version}")));
        }
        let dim = r.u32()? as usize;
        let learning_rate = r.f64()?;
        let epochs = r.u32()?;
        let l2 = r.f64()?;
        let seed = r.u64()?;
        let raw = r.take(dim.checked_mul(4).ok_or_else(|| DetectorError::Format("dim overflow".into()))?)?;
        let weights = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("chunk of 4")))
            .collect();
        let len = r.u32()? as usize;
        let manifest: ModelManifest =
            serde_json::from_slice(r.take(len)?).map_err(|e| DetectorError::Format(format!("manifest: {e}")))?;
        if r.pos != bytes.len() {
            return Err(DetectorError::Format("trailing bytes".into()));
        }
        let header = Hyperparams {
            dim,
            learning_rate,
            epochs,
            l2,
        };
        if manifest.hyperparams != header || manifest.seed != seed {
            return Err(DetectorError::Format("header and manifest disagree".into()));
        }
        Ok(Self { weights, manifest })
    }

    pub fn checksum(&self) -> String {
        hex::encode(Sha256::digest(self.to_bytes()))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), DetectorError> {
        let path = path.as_ref();
        write_atomic(path, &self.to_bytes()).map_err(|source| DetectorError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DetectorError> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|source| DetectorError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_bytes(&bytes)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], DetectorError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| DetectorError::Format("truncated".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, DetectorError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64, DetectorError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> Result<f64, DetectorError> {
        Ok(f64::from_bits(self.u64()?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex(text: &str, label: Label) -> LabeledExample {
        LabeledExample {
            text: text.into(),
            label,
            source_id: text.into(),
            operator: None,
            seed: 0,
        }
    }

    fn toy() -> Vec<LabeledExample> {
        let mut v = Vec::new();
        for i in 0..40 {
            v.push(ex(&format!("a dog runs on grass {i}"), Label::Human));
            v.push(ex(&format!("a dοg rυns οn grαss {i}"), Label::Mutation));
        }
        v
    }

    #[test]
    fn ngram_multiset() {
        let g = ngrams("ab c");
        let count = |k: &str| g.iter().filter(|x| *x == k).count();
        assert_eq!(g.len(), 4 + 3 + 2 + 2);
        assert_eq!(count("c1:a"), 1);
        assert_eq!(count("c2: c"), 1);
        assert_eq!(count("c3:ab "), 1);
        assert_eq!(count("w:<ab>"), 1);
        assert_eq!(count("w:<c>"), 1);
        assert!(ngrams("").is_empty());
    }

    #[test]
    fn features_have_bias_and_counts() {
        let f = featurize("aaa", DEFAULT_DIM);
        assert_eq!(f.entries[0], (0, 1.0));
        let total: f32 = f.entries.iter().map(|e| e.1).sum();
        // bias + 3 unigrams + 2 bigrams + 1 trigram + 1 word
        assert_eq!(total, 8.0);
        assert!(f.entries.windows(2).all(|w| w[0].0 < w[1].0));
        assert!(f.entries.iter().all(|e| (e.0 as usize) < DEFAULT_DIM));
        assert_eq!(featurize("", 16).entries, vec![(0, 1.0)]);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let dim = 10;
        let data: Vec<(FeatureVector, f64)> = toy()
            .iter()
            .take(12)
            .map(|e| (featurize(&e.text, dim), target(e.label)))
            .collect();
        let mut rng = SeedStream::new(4);
        let w: Vec<f64> = (0..dim).map(|_| rng.next_f64() - 0.5).collect();
        let l2 = 0.01;
        let (_, grad) = loss_and_gradient(&w, &data, l2);
        let h = 1e-6;
        for i in 0..dim {
            let mut up = w.clone();
            up[i] += h;
            let mut down = w.clone();
            down[i] -= h;
            let numeric = (loss_and_gradient(&up, &data, l2).0 - loss_and_gradient(&down, &data, l2).0) / (2.0 * h);
            let rel = (numeric - grad[i]).abs() / numeric.abs().max(grad[i].abs()).max(1e-8);
            assert!(rel < 1e-5 || (numeric - grad[i]).abs() < 1e-10, "slot {i}: {numeric} vs {}", grad[i]);
        }
    }

    #[test]
    fn sgd_step_matches_gradient() {
        let x = featurize("ab", 32);
        let mut w = ScaledWeights {
            v: (0..32).map(|i| i as f64 * 0.01).collect(),
            scale: 1.0,
        };
        let before: Vec<f64> = w.v.clone();
        let (lr, l2) = (0.5, 0.1);
        let (_, grad) = loss_and_gradient(&before, &[(x.clone(), 1.0)], l2);
        let g = sigmoid(w.dot(&x)) - 1.0;
        w.step(&x, g, lr, l2);
        for (i, b) in before.iter().enumerate() {
            let expect = b - lr * grad[i];
            assert!((w.v[i] * w.scale - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn learns_toy_problem() {
        let m = train_baseline(&toy(), &Hyperparams { dim: 4096, ..Default::default() }, 1).unwrap();
        assert_eq!(m.manifest.train_accuracy, 1.0);
        assert_eq!(m.predict("a cat runs on grass").label, Label::Human);
        assert_eq!(m.predict("a cαt rυns οn grαss").label, Label::Mutation);
        let again = train_baseline(&toy(), &Hyperparams { dim: 4096, ..Default::default() }, 1).unwrap();
        assert_eq!(m, again);
    }

    #[test]
    fn two_separable_examples() {
        let data = vec![ex("aaaa", Label::Human), ex("zzzz", Label::Mutation)];
        let hp = Hyperparams { dim: 256, epochs: 50, ..Default::default() };
        assert_eq!(train_baseline(&data, &hp, 3).unwrap().manifest.train_accuracy, 1.0);
    }

    #[test]
    fn positive_feature_raises_score() {
        let dim = 4096;
        let mut weights = vec![0.0f32; dim];
        let key = hash_index("w:<zz>", dim);
        weights[key] = 0.3;
        let mut m = train_baseline(&toy(), &Hyperparams { dim, ..Default::default() }, 0).unwrap();
        m.weights = weights;
        let once = m.predict("zz").score;
        let twice = m.predict("zz zz").score;
        assert!(once > 0.5);
        assert!(twice > once);
    }

    #[test]
    fn zero_score_is_mutation() {
        let m = BaselineModel {
            weights: vec![0.0; 8],
            manifest: train_baseline(&toy(), &Hyperparams { dim: 8, ..Default::default() }, 0).unwrap().manifest,
        };
        let p = m.predict("anything");
        assert_eq!(p.score, 0.5);
        assert_eq!(p.label, Label::Mutation);
    }

    #[test]
    fn rejects_degenerate_data() {
        let hp = Hyperparams::default();
        assert!(matches!(train_baseline(&[], &hp, 0), Err(DetectorError::Empty)));
        let humans = vec![ex("a", Label::Human), ex("b", Label::Human)];
        assert!(matches!(train_baseline(&humans, &hp, 0), Err(DetectorError::SingleLabel(Label::Human))));
        let bad = Hyperparams { epochs: 0, ..hp };
        assert!(matches!(train_baseline(&toy(), &bad, 0), Err(DetectorError::Config(_))));
    }

    #[test]
    fn model_file_round_trip() {
        let m = train_baseline(&toy(), &Hyperparams { dim: 1024, ..Default::default() }, 9).unwrap();
        let bytes = m.to_bytes();
        assert_eq!(&bytes[..8], MODEL_MAGIC);
        let back = BaselineModel::from_bytes(&bytes).unwrap();
        assert_eq!(back, m);
        assert!(BaselineModel::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(BaselineModel::from_bytes(&bad).is_err());

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.bin");
        m.save(&path).unwrap();
        assert_eq!(BaselineModel::load(&path).unwrap().checksum(), m.checksum());
    }
}
