//! LSTM cell and layer, forward and backward.
//!
//! Gate order everywhere is input, forget, output, modulation. The cell
//! update is `c_t = f ⊙ c_{t-1} + i ⊙ m` and the output `h_t = o ⊙ tanh(c_t)`,
//! with every gate preactivation of the form `x·W + h_prev·W' + b`.

use crate::error::{Error, Result};
use crate::tensor::{sigmoid, Tensor};

#[derive(Debug, Clone, PartialEq)]
pub struct GateParams {
    /// Input-to-hidden weights `[in, hidden]`.
    pub w: Tensor,
    /// Hidden-to-hidden weights `[hidden, hidden]`.
    pub u: Tensor,
    /// `[hidden]`
    pub b: Vec<f64>,
}

impl GateParams {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        GateParams {
            w: Tensor::zeros(&[input, hidden]),
            u: Tensor::zeros(&[hidden, hidden]),
            b: vec![0.0; hidden],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    pub input: GateParams,
    pub forget: GateParams,
    pub output: GateParams,
    pub modulation: GateParams,
    pub hidden_size: usize,
}

impl LstmParams {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        LstmParams {
            input: GateParams::zeros(input, hidden),
            forget: GateParams::zeros(input, hidden),
            output: GateParams::zeros(input, hidden),
            modulation: GateParams::zeros(input, hidden),
            hidden_size: hidden,
        }
    }

    pub fn input_width(&self) -> usize {
        self.input.w.shape()[0]
    }

    pub fn gates(&self) -> [&GateParams; 4] {
        [&self.input, &self.forget, &self.output, &self.modulation]
    }

    pub fn gates_mut(&mut self) -> [&mut GateParams; 4] {
        [
            &mut self.input,
            &mut self.forget,
            &mut self.output,
            &mut self.modulation,
        ]
    }
}

/// Post-activation gate values for one timestep.
#[derive(Debug, Clone)]
pub struct GateCache {
    pub i: Tensor,
    pub f: Tensor,
    pub o: Tensor,
    pub m: Tensor,
}

fn gate_preact(x: &Tensor, h_prev: &Tensor, g: &GateParams) -> Tensor {
    let mut z = x.matmul(&g.w);
    z.add_assign(&h_prev.matmul(&g.u));
    z.add_row(&g.b);
    z
}

/// One step of the recurrence. Returns `(h_t, c_t, gates)`.
pub fn lstm_cell_forward(
    x: &Tensor,
    h_prev: &Tensor,
    c_prev: &Tensor,
    p: &LstmParams,
) -> Result<(Tensor, Tensor, GateCache)> {
    let h = p.hidden_size;
    if x.ndim() != 2 || x.cols() != p.input_width() {
        return Err(Error::ShapeMismatch(format!(
            "lstm cell expects input [n, {}], got {:?}",
            p.input_width(),
            x.shape()
        )));
    }
    if h_prev.shape() != [x.rows(), h] || c_prev.shape() != [x.rows(), h] {
        return Err(Error::ShapeMismatch(format!(
            "lstm state must be [{}, {}], got h {:?} c {:?}",
            x.rows(),
            h,
            h_prev.shape(),
            c_prev.shape()
        )));
    }
    let i = gate_preact(x, h_prev, &p.input).map(sigmoid);
    let f = gate_preact(x, h_prev, &p.forget).map(sigmoid);
    let o = gate_preact(x, h_prev, &p.output).map(sigmoid);
    let m = gate_preact(x, h_prev, &p.modulation).map(f64::tanh);
    let c = f.hadamard(c_prev).add(&i.hadamard(&m));
    let h_t = o.hadamard(&c.map(f64::tanh));
    Ok((h_t, c, GateCache { i, f, o, m }))
}

/// Everything the backward pass needs from one layer's forward sweep.
#[derive(Debug, Clone)]
pub struct LstmLayerCache {
    pub gates: Vec<GateCache>,
    /// Cell states `c_t`, one per timestep.
    pub c: Vec<Tensor>,
    /// Hidden outputs `h_t`, one per timestep.
    pub h: Vec<Tensor>,
}

impl LstmLayerCache {
    pub fn steps(&self) -> usize {
        self.h.len()
    }

    pub fn final_h(&self) -> &Tensor {
        self.h.last().expect("non-empty sequence")
    }

    pub fn final_c(&self) -> &Tensor {
        self.c.last().expect("non-empty sequence")
    }
}

/// Run the recurrence over a whole sequence. `xs` holds one `[n, in]` matrix
/// per timestep. Zero initial state when `h0`/`c0` are omitted.
pub fn lstm_layer_forward(
    xs: &[Tensor],
    p: &LstmParams,
    h0: Option<&Tensor>,
    c0: Option<&Tensor>,
) -> Result<LstmLayerCache> {
    if xs.is_empty() {
        return Err(Error::InvalidArgument("lstm layer needs at least one timestep".into()));
    }
    let n = xs[0].rows();
    let zeros = Tensor::zeros(&[n, p.hidden_size]);
    let mut h_prev = h0.cloned().unwrap_or_else(|| zeros.clone());
    let mut c_prev = c0.cloned().unwrap_or(zeros);
    let mut cache = LstmLayerCache {
        gates: Vec::with_capacity(xs.len()),
        c: Vec::with_capacity(xs.len()),
        h: Vec::with_capacity(xs.len()),
    };
    for x in xs {
        let (h_t, c_t, gates) = lstm_cell_forward(x, &h_prev, &c_prev, p)?;
        h_prev = h_t.clone();
        c_prev = c_t.clone();
        cache.gates.push(gates);
        cache.c.push(c_t);
        cache.h.push(h_t);
    }
    Ok(cache)
}

/// Full backpropagation through time for one layer.
///
/// `ext_dh[t]` carries gradients arriving at `h_t` from above (upper layer,
/// attention, or the classifier head); `ext_dc_final` carries gradients
/// arriving directly at the final cell state (attention query). Returns the
/// parameter gradients and the per-timestep gradients w.r.t. the inputs.
pub fn lstm_layer_backward(
    xs: &[Tensor],
    cache: &LstmLayerCache,
    p: &LstmParams,
    ext_dh: &[Tensor],
    ext_dc_final: Option<&Tensor>,
) -> (LstmParams, Vec<Tensor>) {
    let steps = cache.steps();
    assert_eq!(xs.len(), steps);
    assert_eq!(ext_dh.len(), steps);
    let n = xs[0].rows();
    let hs = p.hidden_size;
    let mut grads = LstmParams::zeros(p.input_width(), hs);
    let mut dxs = vec![Tensor::zeros(&[n, xs[0].cols()]); steps];

    let zeros = Tensor::zeros(&[n, hs]);
    let mut dh_rec = zeros.clone();
    let mut dc_rec = ext_dc_final.cloned().unwrap_or(zeros);

    for t in (0..steps).rev() {
        let g = &cache.gates[t];
        let c_t = &cache.c[t];
        let tanh_c = c_t.map(f64::tanh);
        let dh = ext_dh[t].add(&dh_rec);

        let d_o = dh.hadamard(&tanh_c);
        let dc = dc_rec.add(&dh.hadamard(&g.o).hadamard(&tanh_c.map(|v| 1.0 - v * v)));

        let c_prev_owned;
        let c_prev: &Tensor = if t == 0 {
            c_prev_owned = Tensor::zeros(&[n, hs]);
            &c_prev_owned
        } else {
            &cache.c[t - 1]
        };
        let h_prev_owned;
        let h_prev: &Tensor = if t == 0 {
            h_prev_owned = Tensor::zeros(&[n, hs]);
            &h_prev_owned
        } else {
            &cache.h[t - 1]
        };

        let d_i = dc.hadamard(&g.m);
        let d_m = dc.hadamard(&g.i);
        let d_f = dc.hadamard(c_prev);
        dc_rec = dc.hadamard(&g.f);

        // pre-activation gradients
        let dz_i = d_i.hadamard(&g.i.map(|v| v * (1.0 - v)));
        let dz_f = d_f.hadamard(&g.f.map(|v| v * (1.0 - v)));
        let dz_o = d_o.hadamard(&g.o.map(|v| v * (1.0 - v)));
        let dz_m = d_m.hadamard(&g.m.map(|v| 1.0 - v * v));

        let x_t = &xs[t];
        let mut dh_next = Tensor::zeros(&[n, hs]);
        for (gp, dz) in grads
            .gates_mut()
            .into_iter()
            .zip([&dz_i, &dz_f, &dz_o, &dz_m])
        {
            gp.w.add_assign(&x_t.t_matmul(dz));
            gp.u.add_assign(&h_prev.t_matmul(dz));
            for (b, s) in gp.b.iter_mut().zip(dz.col_sums()) {
                *b += s;
            }
        }
        for (params_gate, dz) in [&p.input, &p.forget, &p.output, &p.modulation]
            .into_iter()
            .zip([&dz_i, &dz_f, &dz_o, &dz_m])
        {
            dxs[t].add_assign(&dz.matmul_t(&params_gate.w));
            dh_next.add_assign(&dz.matmul_t(&params_gate.u));
        }
        dh_rec = dh_next;
    }
    (grads, dxs)
}
