//! Peeling over nuclear families.
//!
//! Each individual carries a log factor (evidence and, for founders, the
//! prior). Peeling a family sums out its non-pivot members and leaves a
//! message on the pivot. The downward pass sends messages from every
//! family to its remaining members, giving exact marginals on a
//! loop-free pedigree.

use crate::model::{gametes, RecombinationParam, TwoLocusModel};
use crate::numeric::{log_sum_exp, scaled};
use crate::pedigree::{NuclearFamily, PeelingOrder};

use super::Posterior;

/// Gamete lists per parental state, as `(haplotype index, probability)`.
pub(crate) struct GameteTable {
    pub(crate) per_state: Vec<Vec<(usize, f64)>>,
    pub(crate) n_haplotypes: usize,
}

impl GameteTable {
    pub(crate) fn new(m: &TwoLocusModel, r: RecombinationParam) -> Self {
        let per_state = m
            .states()
            .map(|g| {
                gametes(&g, r)
                    .into_iter()
                    .filter(|&(_, p)| p > 0.0)
                    .map(|(h, p)| (m.haplotype_index(h), p))
                    .collect()
            })
            .collect();
        GameteTable { per_state, n_haplotypes: m.n_haplotypes() }
    }
}

enum Message {
    Scalar(f64),
    Vector(Vec<f64>),
}

/// Sums a nuclear family down to `target` (or to a scalar when `target`
/// is `None`). `outs[k]` is the log factor of the k-th member in
/// `family.members()` order, already excluding this family's own message.
fn family_message(
    family: &NuclearFamily,
    target: Option<usize>,
    outs: &[&[f64]],
    table: &GameteTable,
) -> Message {
    let n_states = table.per_state.len();
    let h = table.n_haplotypes;
    let is_target = |ind: usize| target == Some(ind);
    let father_out = (!is_target(family.father)).then(|| outs[0]);
    let mother_out = (!is_target(family.mother)).then(|| outs[1]);

    let mut child_target = None;
    let mut kids: Vec<(Vec<f64>, f64)> = Vec::with_capacity(family.children.len());
    for (k, &c) in family.children.iter().enumerate() {
        if is_target(c) {
            child_target = Some(c);
            continue;
        }
        let (lin, max) = scaled(outs[2 + k]);
        if max == f64::NEG_INFINITY {
            return match target {
                None => Message::Scalar(f64::NEG_INFINITY),
                Some(_) => Message::Vector(vec![f64::NEG_INFINITY; n_states]),
            };
        }
        kids.push((lin, max));
    }
    let kid_offset: f64 = kids.iter().map(|(_, max)| max).sum();

    // base[gf * S + gm]: log of everything but the target, for each parent pair.
    let mut base = vec![f64::NEG_INFINITY; n_states * n_states];
    for gf in 0..n_states {
        let lf = father_out.map_or(0.0, |o| o[gf]);
        if lf == f64::NEG_INFINITY {
            continue;
        }
        let gam_f = &table.per_state[gf];
        for gm in 0..n_states {
            let lm = mother_out.map_or(0.0, |o| o[gm]);
            if lm == f64::NEG_INFINITY {
                continue;
            }
            let gam_m = &table.per_state[gm];
            let mut acc = lf + lm + kid_offset;
            for (lin, _) in &kids {
                let mut s = 0.0;
                for &(a, pa) in gam_f {
                    let row = &lin[a * h..a * h + h];
                    for &(b, pb) in gam_m {
                        s += pa * pb * row[b];
                    }
                }
                if s == 0.0 {
                    acc = f64::NEG_INFINITY;
                    break;
                }
                acc += s.ln();
            }
            base[gf * n_states + gm] = acc;
        }
    }

    match target {
        None => Message::Scalar(log_sum_exp(&base)),
        Some(t) if t == family.father => Message::Vector(
            (0..n_states)
                .map(|gf| log_sum_exp(&base[gf * n_states..(gf + 1) * n_states]))
                .collect(),
        ),
        Some(t) if t == family.mother => {
            let mut column = vec![0.0; n_states];
            Message::Vector(
                (0..n_states)
                    .map(|gm| {
                        for gf in 0..n_states {
                            column[gf] = base[gf * n_states + gm];
                        }
                        log_sum_exp(&column)
                    })
                    .collect(),
            )
        }
        Some(_) => {
            debug_assert!(child_target.is_some());
            let (lin, max) = scaled(&base);
            let mut acc = vec![0.0; n_states];
            if max > f64::NEG_INFINITY {
                for gf in 0..n_states {
                    for gm in 0..n_states {
                        let w = lin[gf * n_states + gm];
                        if w == 0.0 {
                            continue;
                        }
                        for &(a, pa) in &table.per_state[gf] {
                            for &(b, pb) in &table.per_state[gm] {
                                acc[a * h + b] += w * pa * pb;
                            }
                        }
                    }
                }
            }
            Message::Vector(acc.into_iter().map(|x| x.ln() + max).collect())
        }
    }
}

/// Messages received by each individual, tagged with the step that sent them.
struct Inbox {
    received: Vec<Vec<(usize, Vec<f64>)>>,
}

impl Inbox {
    fn new(n: usize) -> Self {
        Inbox { received: vec![Vec::new(); n] }
    }

    /// The individual's log factor times every message except the one from
    /// `skip_step`.
    fn out(&self, unaries: &[Vec<f64>], ind: usize, skip_step: usize) -> Vec<f64> {
        let mut v = unaries[ind].clone();
        for (step, msg) in &self.received[ind] {
            if *step != skip_step {
                for (x, y) in v.iter_mut().zip(msg) {
                    *x += y;
                }
            }
        }
        v
    }
}

fn step_message(
    family: &NuclearFamily,
    step: usize,
    target: Option<usize>,
    unaries: &[Vec<f64>],
    inbox: &Inbox,
    table: &GameteTable,
) -> Message {
    let outs: Vec<Vec<f64>> = family
        .members()
        .map(|m| if Some(m) == target { Vec::new() } else { inbox.out(unaries, m, step) })
        .collect();
    let refs: Vec<&[f64]> = outs.iter().map(Vec::as_slice).collect();
    family_message(family, target, &refs, table)
}

fn upward(
    order: &PeelingOrder,
    unaries: &[Vec<f64>],
    table: &GameteTable,
    inbox: &mut Inbox,
) -> f64 {
    let mut total = 0.0;
    for (i, step) in order.steps.iter().enumerate() {
        match step_message(&step.family, i, step.pivot, unaries, inbox, table) {
            Message::Scalar(ll) => total += ll,
            Message::Vector(msg) => {
                let pivot = step.pivot.expect("vector message has a pivot");
                inbox.received[pivot].push((i, msg));
            }
        }
    }
    for &s in &order.singletons {
        total += log_sum_exp(&unaries[s]);
    }
    total
}

/// Log-likelihood by a single upward pass.
pub(crate) fn collect(
    order: &PeelingOrder,
    m: &TwoLocusModel,
    unaries: &[Vec<f64>],
    r: RecombinationParam,
) -> f64 {
    let table = GameteTable::new(m, r);
    let mut inbox = Inbox::new(unaries.len());
    upward(order, unaries, &table, &mut inbox)
}

/// Upward pass, then a downward pass in reverse peeling order.
pub(crate) fn posterior(
    order: &PeelingOrder,
    m: &TwoLocusModel,
    unaries: &[Vec<f64>],
    r: RecombinationParam,
) -> Posterior {
    let (loglik, marginals, _) = posterior_with_normalizers(order, m, unaries, r);
    Posterior { loglik, marginals }
}

fn posterior_with_normalizers(
    order: &PeelingOrder,
    m: &TwoLocusModel,
    unaries: &[Vec<f64>],
    r: RecombinationParam,
) -> (f64, Vec<Vec<f64>>, Vec<f64>) {
    let table = GameteTable::new(m, r);
    let mut inbox = Inbox::new(unaries.len());
    let loglik = upward(order, unaries, &table, &mut inbox);

    for (i, step) in order.steps.iter().enumerate().rev() {
        let targets: Vec<usize> =
            step.family.members().filter(|&mbr| Some(mbr) != step.pivot).collect();
        for t in targets {
            if let Message::Vector(msg) =
                step_message(&step.family, i, Some(t), unaries, &inbox, &table)
            {
                inbox.received[t].push((i, msg));
            }
        }
    }

    let mut normalizers = Vec::with_capacity(unaries.len());
    let marginals = (0..unaries.len())
        .map(|ind| {
            let belief = inbox.out(unaries, ind, usize::MAX);
            let z = log_sum_exp(&belief);
            normalizers.push(z);
            if z == f64::NEG_INFINITY {
                vec![0.0; belief.len()]
            } else {
                belief.iter().map(|b| (b - z).exp()).collect()
            }
        })
        .collect();
    (loglik, marginals, normalizers)
}
