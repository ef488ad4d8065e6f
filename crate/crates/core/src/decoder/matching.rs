//! Exact minimum-weight perfect matching on small dense graphs.
//!
//! The core is the classic O(n³) primal-dual blossom algorithm for
//! maximum-weight matching (Galil's formulation with vertex/blossom duals,
//! augmenting paths and blossom shrinking/expansion). Weights are scaled to
//! integers so every slack comparison is exact. Minimum-weight perfect
//! matching is obtained by negating weights around a constant and requesting
//! maximum cardinality. Graph sizes here are tiny (the flagged detectors of
//! one shot), so exactness is what matters, not speed.

use std::collections::{HashMap, HashSet};

/// Fixed-point scale for converting f64 weights to integers.
const WEIGHT_SCALE: f64 = 4294967296.0; // 2^32

/// Maximum-weight matching over vertices `0..n` with integer weights.
/// Returns `mate[v] = Some(partner)`. With `max_cardinality` the matching
/// has maximum size and, among those, maximum weight.
pub fn max_weight_matching_int(
    n: usize,
    edges: &[(usize, usize, i64)],
    max_cardinality: bool,
) -> Vec<Option<usize>> {
    Matcher::new(n, edges, max_cardinality).run()
}

/// Maximum-weight matching with f64 weights (scaled internally).
pub fn max_weight_matching(
    edges: &[(usize, usize, f64)],
    max_cardinality: bool,
) -> Vec<Option<usize>> {
    let n = edges.iter().map(|&(i, j, _)| i.max(j) + 1).max().unwrap_or(0);
    let scaled: Vec<(usize, usize, i64)> = edges
        .iter()
        .map(|&(i, j, w)| (i, j, (w * WEIGHT_SCALE).round() as i64))
        .collect();
    max_weight_matching_int(n, &scaled, max_cardinality)
}

/// Exact minimum-weight perfect matching over an even vertex set with a
/// complete (or sufficient) edge list. Panics if no perfect matching exists
/// within the given edges.
pub fn min_weight_perfect_matching(n: usize, edges: &[(usize, usize, f64)]) -> Vec<usize> {
    assert!(n.is_multiple_of(2), "perfect matching needs an even vertex count");
    if n == 0 {
        return Vec::new();
    }
    let scaled: Vec<(usize, usize, i64)> = edges
        .iter()
        .map(|&(i, j, w)| (i, j, (w * WEIGHT_SCALE).round() as i64))
        .collect();
    let wmax = scaled.iter().map(|e| e.2).max().unwrap_or(0);
    // Negate around a cap: maximizing the flipped total minimizes the
    // original total over perfect matchings.
    let flipped: Vec<(usize, usize, i64)> =
        scaled.iter().map(|&(i, j, w)| (i, j, wmax + 1 - w)).collect();
    let mate = max_weight_matching_int(n, &flipped, true);
    let mut out = vec![usize::MAX; n];
    for (v, m) in mate.iter().enumerate().take(n) {
        match m {
            Some(p) => out[v] = *p,
            None => panic!("no perfect matching covers vertex {v}"),
        }
    }
    out
}

/// Brute-force minimum-weight perfect matching cost by enumerating all
/// pairings. `dist[i][j]` must be symmetric. Exponential; fine for ≤ 14
/// vertices in tests.
pub fn brute_force_perfect_matching_cost(dist: &[Vec<f64>]) -> f64 {
    let n = dist.len();
    assert!(n.is_multiple_of(2));
    fn rec(dist: &[Vec<f64>], used: &mut [bool], acc: f64, best: &mut f64) {
        let Some(first) = used.iter().position(|&u| !u) else {
            if acc < *best {
                *best = acc;
            }
            return;
        };
        if acc >= *best {
            return;
        }
        used[first] = true;
        for j in first + 1..used.len() {
            if !used[j] {
                used[j] = true;
                rec(dist, used, acc + dist[first][j], best);
                used[j] = false;
            }
        }
        used[first] = false;
    }
    let mut best = f64::INFINITY;
    rec(dist, &mut vec![false; n], 0.0, &mut best);
    best
}

// ---------------------------------------------------------------------------
// Blossom algorithm
// ---------------------------------------------------------------------------
//
// Nodes are usize: `v < nvertex` is a vertex, otherwise an arena slot of a
// non-trivial blossom. Labels: 0 free, 1 S, 2 T, 5 breadcrumb.

#[derive(Default, Clone)]
struct Blossom {
    /// Ordered sub-blossoms, starting at the base.
    childs: Vec<usize>,
    /// childs[i] connects to childs[i+1] through edges[i] = (v, w) with v in
    /// childs[i] and w in childs[i+1].
    edges: Vec<(usize, usize)>,
    /// Least-slack edges to neighboring S-blossoms (delta3 cache).
    mybestedges: Option<Vec<(usize, usize)>>,
    base: usize,
    dual: i64,
    active: bool,
}

struct Matcher {
    nvertex: usize,
    max_cardinality: bool,
    neighbors: Vec<Vec<usize>>,
    weight: HashMap<(usize, usize), i64>,
    blossoms: Vec<Blossom>,
    free_slots: Vec<usize>,
    mate: Vec<Option<usize>>,
    label: HashMap<usize, u8>,
    labeledge: HashMap<usize, Option<(usize, usize)>>,
    inblossom: Vec<usize>,
    blossomparent: HashMap<usize, Option<usize>>,
    bestedge: HashMap<usize, (usize, usize)>,
    dualvar: Vec<i64>,
    allowedge: HashSet<(usize, usize)>,
    queue: Vec<usize>,
}

impl Matcher {
    fn new(nvertex: usize, edges: &[(usize, usize, i64)], max_cardinality: bool) -> Self {
        let mut neighbors = vec![Vec::new(); nvertex];
        let mut weight = HashMap::new();
        let mut maxweight = 0i64;
        for &(i, j, w) in edges {
            assert!(i != j && i < nvertex && j < nvertex);
            neighbors[i].push(j);
            neighbors[j].push(i);
            weight.insert(Self::key(i, j), w);
            maxweight = maxweight.max(w);
        }
        let mut blossomparent = HashMap::new();
        for v in 0..nvertex {
            blossomparent.insert(v, None);
        }
        Matcher {
            nvertex,
            max_cardinality,
            neighbors,
            weight,
            blossoms: Vec::new(),
            free_slots: Vec::new(),
            mate: vec![None; nvertex],
            label: HashMap::new(),
            labeledge: HashMap::new(),
            inblossom: (0..nvertex).collect(),
            blossomparent,
            bestedge: HashMap::new(),
            dualvar: vec![maxweight; nvertex],
            allowedge: HashSet::new(),
            queue: Vec::new(),
        }
    }

    fn key(i: usize, j: usize) -> (usize, usize) {
        if i < j {
            (i, j)
        } else {
            (j, i)
        }
    }

    fn w(&self, v: usize, w: usize) -> i64 {
        self.weight[&Self::key(v, w)]
    }

    fn slack(&self, v: usize, w: usize) -> i64 {
        self.dualvar[v] + self.dualvar[w] - 2 * self.w(v, w)
    }

    fn is_blossom(&self, node: usize) -> bool {
        node >= self.nvertex
    }

    fn bl(&self, node: usize) -> &Blossom {
        &self.blossoms[node - self.nvertex]
    }

    fn bl_mut(&mut self, node: usize) -> &mut Blossom {
        let n = self.nvertex;
        &mut self.blossoms[node - n]
    }

    fn base_of(&self, node: usize) -> usize {
        if self.is_blossom(node) {
            self.bl(node).base
        } else {
            node
        }
    }

    fn set_base(&mut self, node: usize, base: usize) {
        debug_assert!(self.is_blossom(node));
        self.bl_mut(node).base = base;
    }

    fn leaves(&self, node: usize) -> Vec<usize> {
        if !self.is_blossom(node) {
            return vec![node];
        }
        let mut out = Vec::new();
        let mut stack = vec![node];
        while let Some(t) = stack.pop() {
            if self.is_blossom(t) {
                stack.extend(self.bl(t).childs.iter().copied());
            } else {
                out.push(t);
            }
        }
        out
    }

    fn lbl(&self, node: usize) -> u8 {
        self.label.get(&node).copied().unwrap_or(0)
    }

    fn alloc_blossom(&mut self) -> usize {
        if let Some(slot) = self.free_slots.pop() {
            self.blossoms[slot] = Blossom { active: true, ..Default::default() };
            return self.nvertex + slot;
        }
        self.blossoms.push(Blossom { active: true, ..Default::default() });
        self.nvertex + self.blossoms.len() - 1
    }

    fn free_blossom(&mut self, node: usize) {
        let slot = node - self.nvertex;
        self.blossoms[slot].active = false;
        self.free_slots.push(slot);
    }

    fn active_blossoms(&self) -> Vec<usize> {
        (0..self.blossoms.len())
            .filter(|&s| self.blossoms[s].active)
            .map(|s| self.nvertex + s)
            .collect()
    }

    /// Assign label `t` to the top-level blossom containing vertex `w`,
    /// coming through an edge from vertex `v` (None for S roots).
    fn assign_label(&mut self, w: usize, t: u8, v: Option<usize>) {
        let b = self.inblossom[w];
        debug_assert!(self.lbl(w) == 0 && self.lbl(b) == 0);
        self.label.insert(w, t);
        self.label.insert(b, t);
        let le = v.map(|v| (v, w));
        self.labeledge.insert(w, le);
        self.labeledge.insert(b, le);
        self.bestedge.remove(&w);
        self.bestedge.remove(&b);
        if t == 1 {
            self.queue.extend(self.leaves(b));
        } else {
            let base = self.base_of(b);
            let m = self.mate[base].expect("T-blossom base must be matched");
            self.assign_label(m, 1, Some(base));
        }
    }

    /// Trace back from `v` and `w` to find a common ancestor (new blossom
    /// base) or an augmenting path (None).
    fn scan_blossom(&mut self, v: usize, w: usize) -> Option<usize> {
        let mut path = Vec::new();
        let mut base = None;
        let mut v = Some(v);
        let mut w = Some(w);
        while let Some(vv) = v {
            let b = self.inblossom[vv];
            if self.lbl(b) & 4 != 0 {
                base = Some(self.base_of(b));
                break;
            }
            debug_assert_eq!(self.lbl(b), 1);
            path.push(b);
            self.label.insert(b, 5);
            match self.labeledge.get(&b).copied().flatten() {
                None => {
                    debug_assert!(self.mate[self.base_of(b)].is_none());
                    v = None;
                }
                Some((prev, _)) => {
                    debug_assert_eq!(Some(prev), self.mate[self.base_of(b)]);
                    let bt = self.inblossom[prev];
                    debug_assert_eq!(self.lbl(bt), 2);
                    v = Some(self.labeledge[&bt].expect("T has labeledge").0);
                }
            }
            if w.is_some() {
                std::mem::swap(&mut v, &mut w);
            }
        }
        for b in path {
            self.label.insert(b, 1);
        }
        base
    }

    /// Construct a new S-blossom with the given base through S-vertices
    /// v and w.
    fn add_blossom(&mut self, base: usize, v_in: usize, w_in: usize) {
        let mut v = v_in;
        let mut w = w_in;
        let bb = self.inblossom[base];
        let mut bv = self.inblossom[v];
        let mut bw = self.inblossom[w];
        let b = self.alloc_blossom();
        self.set_base(b, base);
        self.blossomparent.insert(b, None);
        self.blossomparent.insert(bb, Some(b));

        let mut path = Vec::new();
        let mut edgs: Vec<(usize, usize)> = vec![(v, w)];
        while bv != bb {
            self.blossomparent.insert(bv, Some(b));
            path.push(bv);
            let le = self.labeledge[&bv].expect("labeled sub-blossom");
            debug_assert!(
                self.lbl(bv) == 2
                    || (self.lbl(bv) == 1 && Some(le.0) == self.mate[self.base_of(bv)])
            );
            edgs.push(le);
            v = le.0;
            bv = self.inblossom[v];
        }
        path.push(bb);
        path.reverse();
        edgs.reverse();
        while bw != bb {
            self.blossomparent.insert(bw, Some(b));
            path.push(bw);
            let le = self.labeledge[&bw].expect("labeled sub-blossom");
            debug_assert!(
                self.lbl(bw) == 2
                    || (self.lbl(bw) == 1 && Some(le.0) == self.mate[self.base_of(bw)])
            );
            edgs.push((le.1, le.0));
            w = le.0;
            bw = self.inblossom[w];
        }

        debug_assert_eq!(self.lbl(bb), 1);
        self.label.insert(b, 1);
        self.labeledge.insert(b, self.labeledge[&bb]);
        self.bl_mut(b).childs = path.clone();
        self.bl_mut(b).edges = edgs;
        self.bl_mut(b).dual = 0;
        for leaf in self.leaves(b) {
            if self.lbl(self.inblossom[leaf]) == 2 {
                self.queue.push(leaf);
            }
            self.inblossom[leaf] = b;
        }

        // Compute the delta3 cache for the new blossom.
        let mut bestedgeto: HashMap<usize, (usize, usize)> = HashMap::new();
        for &bv in &path {
            let nblists: Vec<Vec<(usize, usize)>> = if self.is_blossom(bv) {
                match self.bl_mut(bv).mybestedges.take() {
                    Some(lst) => vec![lst],
                    None => self
                        .leaves(bv)
                        .into_iter()
                        .map(|lv| {
                            self.neighbors[lv].iter().map(|&nb| (lv, nb)).collect()
                        })
                        .collect(),
                }
            } else {
                vec![self.neighbors[bv].iter().map(|&nb| (bv, nb)).collect()]
            };
            for nblist in nblists {
                for (mut i, mut j) in nblist {
                    if self.inblossom[j] == b {
                        std::mem::swap(&mut i, &mut j);
                    }
                    let bj = self.inblossom[j];
                    if bj != b && self.lbl(bj) == 1 {
                        let better = match bestedgeto.get(&bj) {
                            None => true,
                            Some(&(bi, bjj)) => self.slack(i, j) < self.slack(bi, bjj),
                        };
                        if better {
                            bestedgeto.insert(bj, (i, j));
                        }
                    }
                }
            }
            self.bestedge.remove(&bv);
        }
        let mybest: Vec<(usize, usize)> = bestedgeto.into_values().collect();
        let mut best: Option<(usize, usize)> = None;
        for &(i, j) in &mybest {
            if best.is_none() || self.slack(i, j) < self.slack(best.unwrap().0, best.unwrap().1)
            {
                best = Some((i, j));
            }
        }
        self.bl_mut(b).mybestedges = Some(mybest);
        match best {
            Some(e) => {
                self.bestedge.insert(b, e);
            }
            None => {
                self.bestedge.remove(&b);
            }
        }
    }

    fn wrap(j: i64, len: usize) -> usize {
        j.rem_euclid(len as i64) as usize
    }

    /// Expand a top-level blossom, relabeling sub-blossoms when this happens
    /// mid-stage (T-blossom with zero dual).
    fn expand_blossom(&mut self, b: usize, endstage: bool) {
        let childs = self.bl(b).childs.clone();
        for &s in &childs {
            self.blossomparent.insert(s, None);
            if !self.is_blossom(s) {
                self.inblossom[s] = s;
            } else if endstage && self.bl(s).dual == 0 {
                self.expand_blossom(s, endstage);
            } else {
                for leaf in self.leaves(s) {
                    self.inblossom[leaf] = s;
                }
            }
        }
        if !endstage && self.lbl(b) == 2 {
            let entrychild = {
                let le = self.labeledge[&b].expect("T-blossom has labeledge");
                self.inblossom[le.1]
            };
            let childs = self.bl(b).childs.clone();
            let edges = self.bl(b).edges.clone();
            let len = childs.len();
            let mut j = childs.iter().position(|&c| c == entrychild).unwrap() as i64;
            let jstep: i64 = if j & 1 != 0 {
                j -= len as i64;
                1
            } else {
                -1
            };
            let (mut v, mut w) = self.labeledge[&b].unwrap();
            while j != 0 {
                let (p, q) = if jstep == 1 {
                    edges[Self::wrap(j, len)]
                } else {
                    let (a, bq) = edges[Self::wrap(j - 1, len)];
                    (bq, a)
                };
                self.label.remove(&w);
                self.label.remove(&q);
                self.assign_label(w, 2, Some(v));
                self.allowedge.insert(Self::key(p, q));
                j += jstep;
                let (nv, nw) = if jstep == 1 {
                    edges[Self::wrap(j, len)]
                } else {
                    let (a, bq) = edges[Self::wrap(j - 1, len)];
                    (bq, a)
                };
                v = nv;
                w = nw;
                self.allowedge.insert(Self::key(v, w));
                j += jstep;
            }
            // Relabel the base sub-blossom without stepping to its mate.
            let bw = childs[Self::wrap(j, len)];
            self.label.insert(w, 2);
            self.label.insert(bw, 2);
            self.labeledge.insert(w, Some((v, w)));
            self.labeledge.insert(bw, Some((v, w)));
            self.bestedge.remove(&bw);
            j += jstep;
            while childs[Self::wrap(j, len)] != entrychild {
                let bv = childs[Self::wrap(j, len)];
                if self.lbl(bv) == 1 {
                    j += jstep;
                    continue;
                }
                let mut reached = None;
                for leaf in self.leaves(bv) {
                    if self.lbl(leaf) != 0 {
                        reached = Some(leaf);
                        break;
                    }
                }
                if let Some(v) = reached {
                    debug_assert_eq!(self.lbl(v), 2);
                    debug_assert_eq!(self.inblossom[v], bv);
                    self.label.remove(&v);
                    let base_mate = self.mate[self.base_of(bv)].unwrap();
                    self.label.remove(&base_mate);
                    let prev = self.labeledge[&v].unwrap().0;
                    self.assign_label(v, 2, Some(prev));
                }
                j += jstep;
            }
        }
        self.label.remove(&b);
        self.labeledge.remove(&b);
        self.bestedge.remove(&b);
        self.blossomparent.remove(&b);
        self.free_blossom(b);
    }

    /// Swap matched/unmatched edges over the alternating path through
    /// blossom b from vertex v to the base.
    fn augment_blossom(&mut self, b: usize, v: usize) {
        let mut t = v;
        while self.blossomparent[&t] != Some(b) {
            t = self.blossomparent[&t].expect("v inside b");
        }
        if self.is_blossom(t) {
            self.augment_blossom(t, v);
        }
        let childs = self.bl(b).childs.clone();
        let edges = self.bl(b).edges.clone();
        let len = childs.len();
        let i = childs.iter().position(|&c| c == t).unwrap() as i64;
        let mut j = i;
        let jstep: i64 = if i & 1 != 0 {
            j -= len as i64;
            1
        } else {
            -1
        };
        while j != 0 {
            j += jstep;
            let t1 = childs[Self::wrap(j, len)];
            let (w, x) = if jstep == 1 {
                edges[Self::wrap(j, len)]
            } else {
                let (a, bq) = edges[Self::wrap(j - 1, len)];
                (bq, a)
            };
            if self.is_blossom(t1) {
                self.augment_blossom(t1, w);
            }
            j += jstep;
            let t2 = childs[Self::wrap(j, len)];
            if self.is_blossom(t2) {
                self.augment_blossom(t2, x);
            }
            self.mate[w] = Some(x);
            self.mate[x] = Some(w);
        }
        let i = Self::wrap(i, len);
        let bl = self.bl_mut(b);
        bl.childs.rotate_left(i);
        bl.edges.rotate_left(i);
        let new_base = self.base_of(self.bl(b).childs[0]);
        self.set_base(b, new_base);
        debug_assert_eq!(self.base_of(b), v);
    }

    /// Swap matched/unmatched edges along the augmenting path through
    /// S-vertices v and w.
    fn augment_matching(&mut self, v: usize, w: usize) {
        for (mut s, mut j) in [(v, w), (w, v)] {
            loop {
                let bs = self.inblossom[s];
                debug_assert_eq!(self.lbl(bs), 1);
                debug_assert!(match self.labeledge[&bs] {
                    None => self.mate[self.base_of(bs)].is_none(),
                    Some((prev, _)) => Some(prev) == self.mate[self.base_of(bs)],
                });
                if self.is_blossom(bs) {
                    self.augment_blossom(bs, s);
                }
                self.mate[s] = Some(j);
                let Some((t, _)) = self.labeledge[&bs] else {
                    break;
                };
                let bt = self.inblossom[t];
                debug_assert_eq!(self.lbl(bt), 2);
                let (ns, nj) = self.labeledge[&bt].expect("T has labeledge");
                debug_assert_eq!(self.base_of(bt), t);
                if self.is_blossom(bt) {
                    self.augment_blossom(bt, nj);
                }
                self.mate[nj] = Some(ns);
                s = ns;
                j = nj;
            }
        }
    }

    fn run(mut self) -> Vec<Option<usize>> {
        if self.nvertex == 0 {
            return Vec::new();
        }
        loop {
            self.label.clear();
            self.labeledge.clear();
            self.bestedge.clear();
            for slot in 0..self.blossoms.len() {
                if self.blossoms[slot].active {
                    self.blossoms[slot].mybestedges = None;
                }
            }
            self.allowedge.clear();
            self.queue.clear();

            for v in 0..self.nvertex {
                if self.mate[v].is_none() && self.lbl(self.inblossom[v]) == 0 {
                    self.assign_label(v, 1, None);
                }
            }

            let mut augmented = false;
            loop {
                while let Some(v) = self.queue.pop() {
                    if augmented {
                        break;
                    }
                    debug_assert_eq!(self.lbl(self.inblossom[v]), 1);
                    let nbs = self.neighbors[v].clone();
                    for w in nbs {
                        let bv = self.inblossom[v];
                        let bw = self.inblossom[w];
                        if bv == bw {
                            continue;
                        }
                        let mut kslack = 0;
                        if !self.allowedge.contains(&Self::key(v, w)) {
                            kslack = self.slack(v, w);
                            if kslack <= 0 {
                                self.allowedge.insert(Self::key(v, w));
                            }
                        }
                        if self.allowedge.contains(&Self::key(v, w)) {
                            if self.lbl(bw) == 0 {
                                self.assign_label(w, 2, Some(v));
                            } else if self.lbl(bw) == 1 {
                                match self.scan_blossom(v, w) {
                                    Some(base) => self.add_blossom(base, v, w),
                                    None => {
                                        self.augment_matching(v, w);
                                        augmented = true;
                                        break;
                                    }
                                }
                            } else if self.lbl(w) == 0 {
                                debug_assert_eq!(self.lbl(bw), 2);
                                self.label.insert(w, 2);
                                self.labeledge.insert(w, Some((v, w)));
                            }
                        } else if self.lbl(bw) == 1 {
                            let better = match self.bestedge.get(&bv) {
                                None => true,
                                Some(&(i, j)) => kslack < self.slack(i, j),
                            };
                            if better {
                                self.bestedge.insert(bv, (v, w));
                            }
                        } else if self.lbl(w) == 0 {
                            let better = match self.bestedge.get(&w) {
                                None => true,
                                Some(&(i, j)) => kslack < self.slack(i, j),
                            };
                            if better {
                                self.bestedge.insert(w, (v, w));
                            }
                        }
                    }
                }
                if augmented {
                    break;
                }

                // Dual adjustment.
                let mut deltatype = -1;
                let mut delta = 0i64;
                let mut deltaedge = (0usize, 0usize);
                let mut deltablossom = usize::MAX;
                if !self.max_cardinality {
                    deltatype = 1;
                    delta = *self.dualvar.iter().min().unwrap();
                }
                for v in 0..self.nvertex {
                    if self.lbl(self.inblossom[v]) == 0 {
                        if let Some(&(i, j)) = self.bestedge.get(&v) {
                            let d = self.slack(i, j);
                            if deltatype == -1 || d < delta {
                                delta = d;
                                deltatype = 2;
                                deltaedge = (i, j);
                            }
                        }
                    }
                }
                let mut top_nodes: Vec<usize> = (0..self.nvertex).collect();
                top_nodes.extend(self.active_blossoms());
                for &b in &top_nodes {
                    if self.blossomparent.get(&b) == Some(&None) && self.lbl(b) == 1 {
                        if let Some(&(i, j)) = self.bestedge.get(&b) {
                            let kslack = self.slack(i, j);
                            let d = kslack / 2;
                            if deltatype == -1 || d < delta {
                                delta = d;
                                deltatype = 3;
                                deltaedge = (i, j);
                            }
                        }
                    }
                }
                for b in self.active_blossoms() {
                    if self.blossomparent.get(&b) == Some(&None)
                        && self.lbl(b) == 2
                        && (deltatype == -1 || self.bl(b).dual < delta)
                    {
                        delta = self.bl(b).dual;
                        deltatype = 4;
                        deltablossom = b;
                    }
                }
                if deltatype == -1 {
                    debug_assert!(self.max_cardinality);
                    deltatype = 1;
                    delta = (*self.dualvar.iter().min().unwrap()).max(0);
                }

                for v in 0..self.nvertex {
                    match self.lbl(self.inblossom[v]) {
                        1 => self.dualvar[v] -= delta,
                        2 => self.dualvar[v] += delta,
                        _ => {}
                    }
                }
                for b in self.active_blossoms() {
                    if self.blossomparent.get(&b) == Some(&None) {
                        match self.lbl(b) {
                            1 => self.bl_mut(b).dual += delta,
                            2 => self.bl_mut(b).dual -= delta,
                            _ => {}
                        }
                    }
                }

                match deltatype {
                    1 => break,
                    2 => {
                        let (v, w) = deltaedge;
                        self.allowedge.insert(Self::key(v, w));
                        debug_assert_eq!(self.lbl(self.inblossom[v]), 1);
                        self.queue.push(v);
                    }
                    3 => {
                        let (v, w) = deltaedge;
                        self.allowedge.insert(Self::key(v, w));
                        debug_assert_eq!(self.lbl(self.inblossom[v]), 1);
                        self.queue.push(v);
                    }
                    4 => self.expand_blossom(deltablossom, false),
                    _ => unreachable!(),
                }
            }

            for v in 0..self.nvertex {
                if let Some(m) = self.mate[v] {
                    debug_assert_eq!(self.mate[m], Some(v));
                }
            }
            if !augmented {
                break;
            }
            for b in self.active_blossoms() {
                if !self.bl(b).active {
                    continue;
                }
                if self.blossomparent.get(&b) == Some(&None)
                    && self.lbl(b) == 1
                    && self.bl(b).dual == 0
                {
                    self.expand_blossom(b, true);
                }
            }
        }
        self.mate
    }
}
