use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::CostMatrix;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    pub population: usize,
    pub generations: usize,
    pub stall: usize,
    pub mutation: f64,
    pub crossover: f64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population: 64,
            generations: 200,
            stall: 40,
            mutation: 0.5,
            crossover: 0.9,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::InvalidConfig("population must be at least 2".into()));
        }
        if self.stall > self.generations {
            return Err(Error::InvalidConfig("stall limit exceeds the generation limit".into()));
        }
        if !(0.0..=1.0).contains(&self.mutation) || !(0.0..=1.0).contains(&self.crossover) {
            return Err(Error::InvalidConfig("GA probabilities must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tour {
    /// Full visiting order, fixed start first and fixed end (when given) last.
    pub order: Vec<usize>,
    pub cost: f64,
    pub generations: usize,
    /// Best cost after initialisation and after each generation.
    pub history: Vec<f64>,
}

struct Problem<'a> {
    costs: &'a CostMatrix,
    start: usize,
    end: Option<usize>,
}

impl Problem<'_> {
    fn cost(&self, mid: &[usize]) -> f64 {
        let c = self.costs;
        let Some(first) = mid.first() else {
            return self.end.map_or(0.0, |e| c.get(self.start, e));
        };
        let mut total = c.get(self.start, *first);
        for w in mid.windows(2) {
            total += c.get(w[0], w[1]);
        }
        if let Some(e) = self.end {
            total += c.get(*mid.last().unwrap(), e);
        }
        total
    }

    fn full(&self, mid: &[usize]) -> Vec<usize> {
        let mut v = Vec::with_capacity(mid.len() + 2);
        v.push(self.start);
        v.extend_from_slice(mid);
        v.extend(self.end);
        v
    }

    fn before(&self, mid: &[usize], i: usize) -> usize {
        if i == 0 {
            self.start
        } else {
            mid[i - 1]
        }
    }

    /// Cost of the link leaving position `j`, zero for an open end.
    fn link_after(&self, mid: &[usize], j: usize, from: usize) -> f64 {
        match mid.get(j + 1).copied().or(self.end) {
            Some(n) => self.costs.get(from, n),
            None => 0.0,
        }
    }

    /// First-improvement 2-opt to a local optimum.
    fn two_opt(&self, mid: &mut [usize]) {
        let n = mid.len();
        let c = self.costs;
        loop {
            let mut improved = false;
            for i in 0..n {
                for j in i + 1..n {
                    let p = self.before(mid, i);
                    let old = c.get(p, mid[i]) + self.link_after(mid, j, mid[j]);
                    let new = c.get(p, mid[j]) + self.link_after(mid, j, mid[i]);
                    if new < old - 1e-12 {
                        mid[i..=j].reverse();
                        improved = true;
                    }
                }
            }
            if !improved {
                break;
            }
        }
    }

    /// Moves segments of up to three items to their best other slot until none improves.
    fn or_opt(&self, mid: &mut Vec<usize>) {
        let n = mid.len();
        loop {
            let base = self.cost(mid);
            let mut best: Option<(f64, Vec<usize>)> = None;
            for len in 1..=3.min(n.saturating_sub(1)) {
                for i in 0..=n - len {
                    let mut rest = mid.clone();
                    let seg: Vec<usize> = rest.drain(i..i + len).collect();
                    for slot in 0..=rest.len() {
                        if slot == i {
                            continue;
                        }
                        let mut cand = rest.clone();
                        cand.splice(slot..slot, seg.iter().copied());
                        let c = self.cost(&cand);
                        if c < base - 1e-12 && best.as_ref().is_none_or(|b| c < b.0) {
                            best = Some((c, cand));
                        }
                    }
                }
            }
            match best {
                Some((_, m)) => *mid = m,
                None => break,
            }
        }
    }

    /// 2-opt and segment relocation alternated until neither improves.
    fn local_search(&self, mid: &mut Vec<usize>) {
        loop {
            let before = self.cost(mid);
            self.two_opt(mid);
            self.or_opt(mid);
            if self.cost(mid) >= before - 1e-12 {
                break;
            }
        }
    }

    fn nearest_neighbor(&self, items: &[usize]) -> Vec<usize> {
        let mut left: Vec<usize> = items.to_vec();
        let mut out = Vec::with_capacity(left.len());
        let mut cur = self.start;
        while !left.is_empty() {
            let (k, _) = left
                .iter()
                .enumerate()
                .min_by(|a, b| self.costs.get(cur, *a.1).total_cmp(&self.costs.get(cur, *b.1)).then(a.1.cmp(b.1)))
                .unwrap();
            cur = left.remove(k);
            out.push(cur);
        }
        out
    }
}

/// Partially mapped crossover: the child takes `a[lo..hi]` and fills the rest from `b`,
/// following the segment mapping for conflicts.
pub fn pmx(a: &[usize], b: &[usize], lo: usize, hi: usize) -> Vec<usize> {
    let n = a.len();
    let mut child = vec![usize::MAX; n];
    let pos_a: std::collections::HashMap<usize, usize> = a.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    child[lo..hi].copy_from_slice(&a[lo..hi]);
    let in_seg = |v: usize| pos_a.get(&v).is_some_and(|&p| p >= lo && p < hi);
    for i in (0..lo).chain(hi..n) {
        let mut v = b[i];
        while in_seg(v) {
            // v already placed from a's segment; follow the mapping a[p] -> b[p]
            v = b[pos_a[&v]];
        }
        child[i] = v;
    }
    child
}

/// Order of `prev` restricted to `current`, with the remaining items of `current` added one by one
/// at their cheapest insertion slot. `start` and `end` are fixed neighbours of the sequence.
pub fn warm_start_sequence(
    prev: &[usize],
    current: &[usize],
    costs: &CostMatrix,
    start: Option<usize>,
    end: Option<usize>,
) -> Vec<usize> {
    let keep: std::collections::BTreeSet<usize> =
        current.iter().copied().filter(|c| Some(*c) != start && Some(*c) != end).collect();
    let mut seq: Vec<usize> = Vec::new();
    for p in prev {
        if keep.contains(p) && !seq.contains(p) {
            seq.push(*p);
        }
    }
    let missing: Vec<usize> = keep.iter().copied().filter(|c| !seq.contains(c)).collect();
    for x in missing {
        let mut best = (f64::INFINITY, 0);
        for slot in 0..=seq.len() {
            let pred = if slot == 0 { start } else { Some(seq[slot - 1]) };
            let succ = if slot == seq.len() { end } else { Some(seq[slot]) };
            let delta = match (pred, succ) {
                (Some(p), Some(s)) => costs.get(p, x) + costs.get(x, s) - costs.get(p, s),
                (Some(p), None) => costs.get(p, x),
                (None, Some(s)) => costs.get(x, s),
                (None, None) => 0.0,
            };
            if delta < best.0 {
                best = (delta, slot);
            }
        }
        seq.insert(best.1, x);
    }
    seq
}

/// Local optimum (2-opt and segment moves) of the open tour `start, mid..., end`.
pub fn polish_tour(costs: &CostMatrix, start: usize, end: Option<usize>, mut mid: Vec<usize>) -> Tour {
    let pb = Problem { costs, start, end };
    pb.local_search(&mut mid);
    Tour {
        cost: pb.cost(&mid),
        order: pb.full(&mid),
        generations: 0,
        history: Vec::new(),
    }
}

/// Nearest-neighbour tour from `start` over every other index, ending at `end` when given.
pub fn nearest_neighbor_tour(costs: &CostMatrix, start: usize, end: Option<usize>) -> Tour {
    let pb = Problem { costs, start, end };
    let items: Vec<usize> = (0..costs.len()).filter(|i| *i != start && Some(*i) != end).collect();
    let mid = pb.nearest_neighbor(&items);
    Tour {
        cost: pb.cost(&mid),
        order: pb.full(&mid),
        generations: 0,
        history: Vec::new(),
    }
}

fn tournament<'a>(pop: &'a [(Vec<usize>, f64)], rng: &mut impl Rng) -> &'a Vec<usize> {
    let mut best: Option<&(Vec<usize>, f64)> = None;
    for _ in 0..3 {
        let cand = &pop[rng.gen_range(0..pop.len())];
        if best.is_none_or(|b| cand.1 < b.1) {
            best = Some(cand);
        }
    }
    &best.unwrap().0
}

/// Fixed-ended open TSP over every index of `costs`: memetic GA with PMX crossover, swap
/// mutation and 2-opt refinement of the elite.
pub fn solve_feotsp(
    costs: &CostMatrix,
    start: usize,
    end: Option<usize>,
    warm: Option<&[usize]>,
    ga: &GaConfig,
    rng: &mut impl Rng,
) -> Tour {
    let pb = Problem { costs, start, end };
    let items: Vec<usize> = (0..costs.len()).filter(|i| *i != start && Some(*i) != end).collect();
    if items.len() <= 1 {
        let cost = pb.cost(&items);
        return Tour {
            order: pb.full(&items),
            cost,
            generations: 0,
            history: vec![cost],
        };
    }
    let warm_mid: Option<Vec<usize>> = warm.and_then(|w| {
        let mid: Vec<usize> = w.iter().copied().filter(|i| *i != start && Some(*i) != end).collect();
        let mut sorted = mid.clone();
        sorted.sort_unstable();
        (sorted == items).then_some(mid)
    });

    let mut pop: Vec<(Vec<usize>, f64)> = Vec::with_capacity(ga.population);
    let push = |pop: &mut Vec<(Vec<usize>, f64)>, m: Vec<usize>| {
        let c = pb.cost(&m);
        pop.push((m, c));
    };
    if let Some(w) = &warm_mid {
        push(&mut pop, w.clone());
    }
    push(&mut pop, pb.nearest_neighbor(&items));
    while pop.len() < ga.population.max(2) {
        let mut m = match &warm_mid {
            Some(w) if pop.len().is_multiple_of(2) => w.clone(),
            _ => items.clone(),
        };
        if warm_mid.is_some() && pop.len().is_multiple_of(2) {
            let swaps = rng.gen_range(1..=m.len());
            for _ in 0..swaps {
                let i = rng.gen_range(0..m.len());
                let j = rng.gen_range(0..m.len());
                m.swap(i, j);
            }
        } else {
            m.shuffle(rng);
        }
        push(&mut pop, m);
    }

    let best_of = |pop: &[(Vec<usize>, f64)]| {
        pop.iter()
            .enumerate()
            .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1).then(a.0.cmp(&b.0)))
            .map(|(i, _)| i)
            .unwrap()
    };
    let mut best = pop[best_of(&pop)].clone();
    let mut history = vec![best.1];
    let mut stall = 0;
    let mut generations = 0;
    let n = items.len();
    let mut polished: Option<(Vec<usize>, f64)> = None;
    for _ in 0..ga.generations {
        generations += 1;
        let (elite, elite_cost) = match &polished {
            Some(p) if p.1 <= best.1 => p.clone(),
            _ => {
                let mut m = best.0.clone();
                pb.local_search(&mut m);
                let c = pb.cost(&m);
                polished = Some((m.clone(), c));
                (m, c)
            }
        };
        let mut next = vec![(elite, elite_cost)];
        while next.len() < pop.len() {
            let a = tournament(&pop, rng);
            let mut child = if rng.gen::<f64>() < ga.crossover {
                let b = tournament(&pop, rng);
                let lo = rng.gen_range(0..n);
                let hi = rng.gen_range(lo + 1..=n);
                pmx(a, b, lo, hi)
            } else {
                a.clone()
            };
            if rng.gen::<f64>() < ga.mutation {
                let i = rng.gen_range(0..n);
                let j = rng.gen_range(0..n);
                child.swap(i, j);
            }
            if next.iter().any(|(m, _)| *m == child) {
                // clones add nothing; a fresh random tour keeps the population diverse
                child.shuffle(rng);
            }
            let c = pb.cost(&child);
            next.push((child, c));
        }
        pop = next;
        let cand = &pop[best_of(&pop)];
        if cand.1 < best.1 - 1e-12 {
            best = cand.clone();
            stall = 0;
        } else {
            stall += 1;
        }
        history.push(best.1);
        if stall >= ga.stall {
            break;
        }
    }
    Tour {
        order: pb.full(&best.0),
        cost: best.1,
        generations,
        history,
    }
}
