use rand::Rng;
use serde::{Deserialize, Serialize};

use super::fm::{check_active, first_order, pair_sum, slot_embeddings};
use super::text_cnn::{TextCache, TextCnn, TextCnnConfig};
use crate::error::{Error, Result};
use crate::extraction::{SparseFeature, TextMatrix};
use crate::neural::{relu, relu_backward, Dense, Module, Param};
use crate::scalar::Scalar;

/// Shape of one explicit tower. `text: None` is the entity-only variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplicitConfig {
    pub s: usize,
    pub d_x: usize,
    pub d_fm: usize,
    pub d_e: usize,
    pub deep_widths: Vec<usize>,
    pub text: Option<TextCnnConfig>,
}

impl ExplicitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.s == 0 || self.d_fm == 0 || self.d_e == 0 || self.d_x < self.s {
            return Err(Error::Config(format!(
                "explicit tower needs s ≥ 1, d_x ≥ s, d_fm ≥ 1, d_E ≥ 1 (got s={}, d_x={}, d_fm={}, d_E={})",
                self.s, self.d_x, self.d_fm, self.d_e
            )));
        }
        if self.deep_widths.contains(&0) {
            return Err(Error::Config("deep block widths must be ≥ 1".into()));
        }
        if let Some(t) = &self.text {
            t.validate()?;
        }
        Ok(())
    }

    fn deep_out(&self) -> usize {
        self.deep_widths.last().copied().unwrap_or(self.s * self.d_fm)
    }

    fn text_out(&self) -> usize {
        self.text.as_ref().map_or(0, |t| t.out_dim)
    }

    /// Width of the vector fed to the final linear layer.
    pub fn concat_len(&self) -> usize {
        self.s + self.d_fm + self.deep_out() + self.text_out()
    }
}

/// Model input for one document.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitInput {
    pub sparse: SparseFeature,
    pub text: TextMatrix,
}

#[derive(Debug, Clone)]
pub struct ExplicitTower<T: Scalar = f64> {
    pub config: ExplicitConfig,
    /// `[d_x]`
    pub fm_w: Param<T>,
    /// `[d_x, d_fm]`
    pub fm_v: Param<T>,
    pub deep: Vec<Dense<T>>,
    pub text: Option<TextCnn<T>>,
    pub out: Dense<T>,
}

#[derive(Debug, Clone)]
pub struct TowerCache<T: Scalar = f64> {
    slots: Vec<(usize, f64)>,
    a: Vec<T>,
    /// Input of every deep layer, then the pre-activations.
    deep_in: Vec<Vec<T>>,
    deep_z: Vec<Vec<T>>,
    text: Option<TextCache<T>>,
    concat: Vec<T>,
}

impl<T: Scalar> ExplicitTower<T> {
    /// Parameter names are prefixed with `name`, e.g. `explicit.resume`.
    pub fn new<R: Rng + ?Sized>(name: &str, config: ExplicitConfig, rng: &mut R) -> Result<Self> {
        config.validate()?;
        let fm_w = Param::uniform(format!("{name}.fm.w"), &[config.d_x], 1.0 / (config.s as f64).sqrt(), rng);
        let fm_v = Param::uniform(
            format!("{name}.fm.v"),
            &[config.d_x, config.d_fm],
            1.0 / (config.d_fm as f64).sqrt(),
            rng,
        );
        let mut deep = Vec::with_capacity(config.deep_widths.len());
        let mut width = config.s * config.d_fm;
        for (l, &w) in config.deep_widths.iter().enumerate() {
            deep.push(Dense::new(&format!("{name}.deep.{l}"), width, w, rng));
            width = w;
        }
        let text = match &config.text {
            Some(t) => Some(TextCnn::new(&format!("{name}.text"), t.clone(), rng)?),
            None => None,
        };
        let out = Dense::new(&format!("{name}.out"), config.concat_len(), config.d_e, rng);
        Ok(ExplicitTower {
            config,
            fm_w,
            fm_v,
            deep,
            text,
            out,
        })
    }

    pub fn d_e(&self) -> usize {
        self.config.d_e
    }

    pub fn embed(&self, input: &ExplicitInput) -> Result<Vec<T>> {
        Ok(self.forward(input)?.0)
    }

    pub fn forward(&self, input: &ExplicitInput) -> Result<(Vec<T>, TowerCache<T>)> {
        let c = &self.config;
        check_active(&input.sparse, c.s, c.d_x)?;
        let x = &input.sparse;
        let mut concat = first_order(x, self.fm_w.value.as_slice());
        let a = slot_embeddings(x, &self.fm_v.value);
        concat.extend(pair_sum(&a, c.d_fm));
        let mut deep_in = Vec::with_capacity(self.deep.len());
        let mut deep_z = Vec::with_capacity(self.deep.len());
        let mut h = a.clone();
        for layer in &self.deep {
            let z = layer.forward(&h);
            let next = relu(&z);
            deep_in.push(std::mem::replace(&mut h, next));
            deep_z.push(z);
        }
        concat.extend_from_slice(&h);
        let text = match &self.text {
            Some(cnn) => {
                let (t, cache) = cnn.forward(&input.text)?;
                concat.extend(t);
                Some(cache)
            }
            None => None,
        };
        let out = self.out.forward(&concat);
        Ok((
            out,
            TowerCache {
                slots: x.slots.clone(),
                a,
                deep_in,
                deep_z,
                text,
                concat,
            },
        ))
    }

    /// Accumulates parameter gradients for `d loss / d output = grad_out`.
    pub fn backward(&mut self, cache: &TowerCache<T>, grad_out: &[T]) {
        let (s, d_fm) = (self.config.s, self.config.d_fm);
        let d_concat = self.out.backward(&cache.concat, grad_out);
        let (d_first, rest) = d_concat.split_at(s);
        let (d_second, rest) = rest.split_at(d_fm);
        let (d_deep, d_text) = rest.split_at(self.config.deep_out());

        let gw = self.fm_w.grad.as_mut_slice();
        for (&(i, v), &g) in cache.slots.iter().zip(d_first) {
            gw[i] = gw[i] + g * T::of(v);
        }

        let mut d_a = d_deep.to_vec();
        for (l, layer) in self.deep.iter_mut().enumerate().rev() {
            let d_z = relu_backward(&cache.deep_z[l], &d_a);
            d_a = layer.backward(&cache.deep_in[l], &d_z);
        }

        let mut total = vec![T::zero(); d_fm];
        for e in cache.a.chunks(d_fm) {
            for k in 0..d_fm {
                total[k] = total[k] + e[k];
            }
        }
        let two = T::of(2.0);
        for (j, e) in cache.a.chunks(d_fm).enumerate() {
            for k in 0..d_fm {
                d_a[j * d_fm + k] = d_a[j * d_fm + k] + d_second[k] * two * (total[k] - e[k]);
            }
        }
        for (j, &(i, v)) in cache.slots.iter().enumerate() {
            let row = self.fm_v.grad.row_mut(i);
            for k in 0..d_fm {
                row[k] = row[k] + d_a[j * d_fm + k] * T::of(v);
            }
        }

        if let (Some(cnn), Some(tc)) = (self.text.as_mut(), cache.text.as_ref()) {
            cnn.backward(tc, d_text);
        }
    }
}

impl<T: Scalar> Module<T> for ExplicitTower<T> {
    fn params(&self) -> Vec<&Param<T>> {
        let mut v = vec![&self.fm_w, &self.fm_v];
        for d in &self.deep {
            v.extend(d.params());
        }
        if let Some(t) = &self.text {
            v.extend(t.params());
        }
        v.extend(self.out.params());
        v
    }

    fn params_mut(&mut self) -> Vec<&mut Param<T>> {
        let mut v = vec![&mut self.fm_w, &mut self.fm_v];
        for d in &mut self.deep {
            v.extend(d.params_mut());
        }
        if let Some(t) = &mut self.text {
            v.extend(t.params_mut());
        }
        v.extend(self.out.params_mut());
        v
    }
}
