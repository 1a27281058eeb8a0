//! Recurrent cell forward and backward passes.
//!
//! Conventions: pre-activations are `w_in·x + w_rec·h_prev + bias`. The GRU
//! uses update gate z, reset gate r and candidate n with
//! `h = (1-z)⊙n + z⊙h_prev`, the reset gate applied to `h_prev` before the
//! candidate's recurrent matrix. The LSTM uses input/forget/output gates and
//! candidate g with `c = f⊙c_prev + i⊙g`, `h = o⊙tanh(c)`.

use super::{CellKind, CellWeights};

// Gate indices into CellWeights vectors.
const V_H: usize = 0;
const G_Z: usize = 0;
const G_R: usize = 1;
const G_N: usize = 2;
const L_I: usize = 0;
const L_F: usize = 1;
const L_G: usize = 2;
const L_O: usize = 3;

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `w_in·x + w_rec·h + bias` for one gate.
fn preact(cell: &CellWeights, gate: usize, x: &[f64], h: &[f64]) -> Vec<f64> {
    let mut a = cell.w_in[gate].matvec(x);
    let rec = cell.w_rec[gate].matvec(h);
    let bias = cell.bias[gate].row(0);
    for ((av, rv), bv) in a.iter_mut().zip(rec.iter()).zip(bias.iter()) {
        *av += rv + bv;
    }
    a
}

#[derive(Debug, Clone)]
pub(crate) enum Gates {
    Vanilla,
    Gru {
        z: Vec<f64>,
        r: Vec<f64>,
        n: Vec<f64>,
    },
    Lstm {
        i: Vec<f64>,
        f: Vec<f64>,
        g: Vec<f64>,
        o: Vec<f64>,
        tc: Vec<f64>,
    },
}

/// Activations of one time step, cached for the backward pass.
#[derive(Debug, Clone)]
pub(crate) struct StepState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
    pub gates: Gates,
}

pub(crate) fn forward_step(
    cell: &CellWeights,
    x: &[f64],
    h_prev: &[f64],
    c_prev: &[f64],
) -> StepState {
    match cell.kind {
        CellKind::Vanilla => {
            let a = preact(cell, V_H, x, h_prev);
            let h: Vec<f64> = a.iter().map(|&v| v.tanh()).collect();
            StepState {
                h,
                c: Vec::new(),
                gates: Gates::Vanilla,
            }
        }
        CellKind::Gru => {
            let z: Vec<f64> = preact(cell, G_Z, x, h_prev)
                .into_iter()
                .map(sigmoid)
                .collect();
            let r: Vec<f64> = preact(cell, G_R, x, h_prev)
                .into_iter()
                .map(sigmoid)
                .collect();
            let rh: Vec<f64> = r.iter().zip(h_prev.iter()).map(|(a, b)| a * b).collect();
            let n: Vec<f64> = preact(cell, G_N, x, &rh)
                .into_iter()
                .map(f64::tanh)
                .collect();
            let h: Vec<f64> = z
                .iter()
                .zip(n.iter())
                .zip(h_prev.iter())
                .map(|((zv, nv), hv)| (1.0 - zv) * nv + zv * hv)
                .collect();
            StepState {
                h,
                c: Vec::new(),
                gates: Gates::Gru { z, r, n },
            }
        }
        CellKind::Lstm => {
            let i: Vec<f64> = preact(cell, L_I, x, h_prev)
                .into_iter()
                .map(sigmoid)
                .collect();
            let f: Vec<f64> = preact(cell, L_F, x, h_prev)
                .into_iter()
                .map(sigmoid)
                .collect();
            let g: Vec<f64> = preact(cell, L_G, x, h_prev)
                .into_iter()
                .map(f64::tanh)
                .collect();
            let o: Vec<f64> = preact(cell, L_O, x, h_prev)
                .into_iter()
                .map(sigmoid)
                .collect();
            let c: Vec<f64> = f
                .iter()
                .zip(c_prev.iter())
                .zip(i.iter().zip(g.iter()))
                .map(|((fv, cv), (iv, gv))| fv * cv + iv * gv)
                .collect();
            let tc: Vec<f64> = c.iter().map(|&v| v.tanh()).collect();
            let h: Vec<f64> = o.iter().zip(tc.iter()).map(|(ov, tv)| ov * tv).collect();
            StepState {
                h,
                c,
                gates: Gates::Lstm { i, f, g, o, tc },
            }
        }
    }
}

/// Gradients flowing out of one step's backward pass.
pub(crate) struct StepGrad {
    pub dx: Vec<f64>,
    pub dh_prev: Vec<f64>,
    pub dc_prev: Vec<f64>,
}

/// Accumulate a gate's parameter gradients and return the contribution of
/// its pre-activation gradient to dx and the recurrent input gradient.
fn accumulate_gate(
    cell: &CellWeights,
    grads: &mut CellWeights,
    gate: usize,
    da: &[f64],
    x: &[f64],
    rec_input: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    grads.w_in[gate].add_outer(da, x);
    grads.w_rec[gate].add_outer(da, rec_input);
    grads.bias[gate].add_to_row(0, da);
    (cell.w_in[gate].matvec_t(da), cell.w_rec[gate].matvec_t(da))
}

fn add_into(acc: &mut [f64], v: &[f64]) {
    for (a, b) in acc.iter_mut().zip(v.iter()) {
        *a += b;
    }
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn backward_step(
    cell: &CellWeights,
    x: &[f64],
    h_prev: &[f64],
    c_prev: &[f64],
    state: &StepState,
    dh: &[f64],
    dc: &[f64],
    grads: &mut CellWeights,
) -> StepGrad {
    let hidden = cell.hidden_dim();
    match (&state.gates, cell.kind) {
        (Gates::Vanilla, CellKind::Vanilla) => {
            let da: Vec<f64> = dh
                .iter()
                .zip(state.h.iter())
                .map(|(d, h)| d * (1.0 - h * h))
                .collect();
            let (dx, dh_prev) = accumulate_gate(cell, grads, V_H, &da, x, h_prev);
            StepGrad {
                dx,
                dh_prev,
                dc_prev: Vec::new(),
            }
        }
        (Gates::Gru { z, r, n }, CellKind::Gru) => {
            let dn: Vec<f64> = dh.iter().zip(z.iter()).map(|(d, zv)| d * (1.0 - zv)).collect();
            let dz: Vec<f64> = dh
                .iter()
                .zip(h_prev.iter().zip(n.iter()))
                .map(|(d, (hv, nv))| d * (hv - nv))
                .collect();
            let mut dh_prev: Vec<f64> =
                dh.iter().zip(z.iter()).map(|(d, zv)| d * zv).collect();

            let da_n: Vec<f64> = dn
                .iter()
                .zip(n.iter())
                .map(|(d, nv)| d * (1.0 - nv * nv))
                .collect();
            let rh: Vec<f64> = r.iter().zip(h_prev.iter()).map(|(a, b)| a * b).collect();
            let (mut dx, drh) = accumulate_gate(cell, grads, G_N, &da_n, x, &rh);

            let dr: Vec<f64> = drh.iter().zip(h_prev.iter()).map(|(d, hv)| d * hv).collect();
            for (acc, (d, rv)) in dh_prev.iter_mut().zip(drh.iter().zip(r.iter())) {
                *acc += d * rv;
            }

            let da_z: Vec<f64> = dz
                .iter()
                .zip(z.iter())
                .map(|(d, zv)| d * zv * (1.0 - zv))
                .collect();
            let da_r: Vec<f64> = dr
                .iter()
                .zip(r.iter())
                .map(|(d, rv)| d * rv * (1.0 - rv))
                .collect();
            let (dx_z, dh_z) = accumulate_gate(cell, grads, G_Z, &da_z, x, h_prev);
            let (dx_r, dh_r) = accumulate_gate(cell, grads, G_R, &da_r, x, h_prev);
            add_into(&mut dx, &dx_z);
            add_into(&mut dx, &dx_r);
            add_into(&mut dh_prev, &dh_z);
            add_into(&mut dh_prev, &dh_r);
            StepGrad {
                dx,
                dh_prev,
                dc_prev: Vec::new(),
            }
        }
        (Gates::Lstm { i, f, g, o, tc }, CellKind::Lstm) => {
            let do_: Vec<f64> = dh.iter().zip(tc.iter()).map(|(d, t)| d * t).collect();
            let mut dc_total = vec![0.0; hidden];
            for k in 0..hidden {
                let through_h = dh[k] * o[k] * (1.0 - tc[k] * tc[k]);
                dc_total[k] = dc.get(k).copied().unwrap_or(0.0) + through_h;
            }
            let di: Vec<f64> = dc_total.iter().zip(g.iter()).map(|(d, gv)| d * gv).collect();
            let dg: Vec<f64> = dc_total.iter().zip(i.iter()).map(|(d, iv)| d * iv).collect();
            let df: Vec<f64> = dc_total
                .iter()
                .zip(c_prev.iter())
                .map(|(d, cv)| d * cv)
                .collect();
            let dc_prev: Vec<f64> = dc_total.iter().zip(f.iter()).map(|(d, fv)| d * fv).collect();

            let da_i: Vec<f64> = di
                .iter()
                .zip(i.iter())
                .map(|(d, v)| d * v * (1.0 - v))
                .collect();
            let da_f: Vec<f64> = df
                .iter()
                .zip(f.iter())
                .map(|(d, v)| d * v * (1.0 - v))
                .collect();
            let da_g: Vec<f64> = dg
                .iter()
                .zip(g.iter())
                .map(|(d, v)| d * (1.0 - v * v))
                .collect();
            let da_o: Vec<f64> = do_
                .iter()
                .zip(o.iter())
                .map(|(d, v)| d * v * (1.0 - v))
                .collect();

            let (mut dx, mut dh_prev) = accumulate_gate(cell, grads, L_I, &da_i, x, h_prev);
            for (gate, da) in [(L_F, &da_f), (L_G, &da_g), (L_O, &da_o)] {
                let (dxg, dhg) = accumulate_gate(cell, grads, gate, da, x, h_prev);
                add_into(&mut dx, &dxg);
                add_into(&mut dh_prev, &dhg);
            }
            StepGrad {
                dx,
                dh_prev,
                dc_prev,
            }
        }
        _ => unreachable!("cache kind matches cell kind"),
    }
}

/// Run a cell over a sequence left to right from zero initial state.
pub(crate) fn run_forward(cell: &CellWeights, xs: &[Vec<f64>]) -> Vec<StepState> {
    let hidden = cell.hidden_dim();
    let zero_h = vec![0.0; hidden];
    let zero_c = vec![0.0; hidden];
    let mut states: Vec<StepState> = Vec::with_capacity(xs.len());
    for (t, x) in xs.iter().enumerate() {
        let (h_prev, c_prev) = if t == 0 {
            (zero_h.as_slice(), zero_c.as_slice())
        } else {
            let prev = &states[t - 1];
            (
                prev.h.as_slice(),
                if prev.c.is_empty() {
                    zero_c.as_slice()
                } else {
                    prev.c.as_slice()
                },
            )
        };
        states.push(forward_step(cell, x, h_prev, c_prev));
    }
    states
}

/// Backpropagate through a sequence run. `dh_ext[t]` is the external
/// gradient arriving at the hidden state of step `t`. Parameter gradients
/// accumulate into `grads`; the per-step input gradients are returned.
pub(crate) fn run_backward(
    cell: &CellWeights,
    xs: &[Vec<f64>],
    states: &[StepState],
    dh_ext: &[Vec<f64>],
    grads: &mut CellWeights,
) -> Vec<Vec<f64>> {
    let hidden = cell.hidden_dim();
    let len = xs.len();
    let zero_h = vec![0.0; hidden];
    let zero_c = vec![0.0; hidden];
    let mut dxs: Vec<Vec<f64>> = vec![Vec::new(); len];
    let mut dh_carry = vec![0.0; hidden];
    let mut dc_carry = vec![0.0; hidden];
    for t in (0..len).rev() {
        let mut dh = dh_ext[t].clone();
        add_into(&mut dh, &dh_carry);
        let (h_prev, c_prev) = if t == 0 {
            (zero_h.as_slice(), zero_c.as_slice())
        } else {
            let prev = &states[t - 1];
            (
                prev.h.as_slice(),
                if prev.c.is_empty() {
                    zero_c.as_slice()
                } else {
                    prev.c.as_slice()
                },
            )
        };
        let step = backward_step(cell, &xs[t], h_prev, c_prev, &states[t], &dh, &dc_carry, grads);
        dxs[t] = step.dx;
        dh_carry = step.dh_prev;
        dc_carry = if step.dc_prev.is_empty() {
            vec![0.0; hidden]
        } else {
            step.dc_prev
        };
    }
    dxs
}
