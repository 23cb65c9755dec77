//! Incremental Delaunay construction (Bowyer-Watson with ghost cells).
//!
//! The triangulation is maintained as a closed complex: every hull facet
//! carries a ghost cell whose last vertex is the `GHOST` sentinel, so points
//! outside the current hull are inserted by exactly the same cavity mechanism
//! as interior points. An insertion finds one conflicting cell (visibility
//! walk, then a ghost-graph search, then a full scan as last resort), grows
//! the conflict cavity by flood fill, deletes it, and fans new cells from the
//! inserted point to every cavity boundary facet. Facet bookkeeping is keyed
//! by sorted vertex tuples; if the cavity boundary fails to close up the
//! construction aborts with an error instead of producing a corrupt complex.
//!
//! Vertices are inserted in ascending input order after a deterministic
//! initial simplex, so identical inputs give identical triangulations.

use std::collections::HashMap;
use std::hash::BuildHasherDefault;

use super::predicates::{
    coords, ghost_conflict, insphere_conflict, orientation, PredScratch, TIE_TOL,
};
use super::GeometryError;

/// Sentinel vertex index marking a ghost cell (sorts after all real indices).
pub(super) const GHOST: u32 = u32::MAX;
/// Neighbor slot not yet wired.
const UNSET: u32 = u32::MAX;
/// Padding value for facet keys (never a legal vertex index).
const PAD: u32 = u32::MAX - 1;

/// Largest dimension the triangulation supports. Nothing in this crate needs
/// more than 6; facet keys are fixed-size arrays bounded by this.
pub const MAX_TRI_DIM: usize = 8;

/// Hull marker in the compacted neighbor table.
pub(super) const BOUNDARY: u32 = u32::MAX;

/// Compacted output of the construction: real cells only.
pub(super) struct RawComplex {
    pub simplices: Vec<u32>,
    pub neighbors: Vec<u32>,
}

type FacetKey = [u32; MAX_TRI_DIM];

#[derive(Default)]
struct FnvHasher(u64);

impl std::hash::Hasher for FnvHasher {
    fn finish(&self) -> u64 {
        self.0
    }
    fn write(&mut self, bytes: &[u8]) {
        let mut h = if self.0 == 0 { 0xcbf2_9ce4_8422_2325 } else { self.0 };
        for &b in bytes {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        self.0 = h;
    }
}

type FacetMap = HashMap<FacetKey, (u32, u8), BuildHasherDefault<FnvHasher>>;

struct Builder<'a> {
    dim: usize,
    stride: usize,
    pts: &'a [f64],
    heights: Vec<f64>,
    verts: Vec<u32>,
    neigh: Vec<u32>,
    dead: Vec<bool>,
    visit: Vec<u64>,
    conflict_flag: Vec<bool>,
    epoch: u64,
    last_real: u32,
    alive_real: usize,
    scratch: PredScratch,
    solve: Vec<f64>,
    rhs: Vec<f64>,
    cavity: Vec<u32>,
    queue: Vec<u32>,
    fresh: Vec<u32>,
    facet_map: FacetMap,
}

pub(super) fn build(dim: usize, pts: &[f64]) -> Result<RawComplex, GeometryError> {
    if dim < 1 || dim > MAX_TRI_DIM {
        return Err(GeometryError::UnsupportedDim { dim });
    }
    debug_assert_eq!(pts.len() % dim, 0);
    let n = pts.len() / dim;
    if n < dim + 1 {
        return Err(GeometryError::TooFewPoints { needed: dim + 1, got: n });
    }
    if n as u64 >= PAD as u64 {
        return Err(GeometryError::TooFewPoints { needed: dim + 1, got: n });
    }
    if pts.iter().any(|c| !c.is_finite()) {
        return Err(GeometryError::NonFiniteCoordinate);
    }

    let heights: Vec<f64> = pts
        .chunks(dim)
        .map(|p| p.iter().map(|c| c * c).sum())
        .collect();

    let initial = initial_simplex(dim, pts)?;

    let mut b = Builder {
        dim,
        stride: dim + 1,
        pts,
        heights,
        verts: Vec::with_capacity(8 * (dim + 1) * n.max(16)),
        neigh: Vec::new(),
        dead: Vec::new(),
        visit: Vec::new(),
        conflict_flag: Vec::new(),
        epoch: 0,
        last_real: 0,
        alive_real: 0,
        scratch: PredScratch::new(),
        solve: Vec::new(),
        rhs: Vec::new(),
        cavity: Vec::new(),
        queue: Vec::new(),
        fresh: Vec::new(),
        facet_map: FacetMap::default(),
    };

    // Initial complex: one real cell plus a ghost per facet.
    let real = b.push_cell(&initial);
    b.fresh.clear();
    b.fresh.push(real);
    let mut gverts = vec![0u32; dim + 1];
    for k in 0..=dim {
        let mut w = 0;
        for (j, &v) in initial.iter().enumerate() {
            if j != k {
                gverts[w] = v;
                w += 1;
            }
        }
        gverts[dim] = GHOST;
        let g = b.push_cell(&gverts);
        b.fresh.push(g);
    }
    let fresh = std::mem::take(&mut b.fresh);
    b.wire_fresh(&fresh)?;
    b.fresh = fresh;

    let mut in_initial = vec![false; n];
    for &v in &initial {
        in_initial[v as usize] = true;
    }
    for p in 0..n as u32 {
        if !in_initial[p as usize] {
            b.insert(p)?;
        }
    }

    Ok(b.compact())
}

/// Deterministic, well-conditioned starting simplex: point 0, then greedily
/// the point with the largest residual off the affine span chosen so far.
fn initial_simplex(dim: usize, pts: &[f64]) -> Result<Vec<u32>, GeometryError> {
    let n = pts.len() / dim;
    let mut chosen: Vec<u32> = vec![0];
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let origin = coords(pts, dim, 0).to_vec();
    let mut resid = vec![0.0f64; dim];
    while chosen.len() < dim + 1 {
        let mut best_i = None;
        let mut best_norm = 0.0;
        for i in 0..n as u32 {
            if chosen.contains(&i) {
                continue;
            }
            let xi = coords(pts, dim, i);
            for c in 0..dim {
                resid[c] = xi[c] - origin[c];
            }
            for bvec in &basis {
                let dot: f64 = (0..dim).map(|c| resid[c] * bvec[c]).sum();
                for c in 0..dim {
                    resid[c] -= dot * bvec[c];
                }
            }
            let norm2: f64 = resid.iter().map(|r| r * r).sum();
            if norm2 > best_norm {
                best_norm = norm2;
                best_i = Some((i, resid.clone()));
            }
        }
        let Some((i, mut dir)) = best_i else {
            return Err(GeometryError::DegenerateInput);
        };
        if best_norm <= 0.0 {
            return Err(GeometryError::DegenerateInput);
        }
        let inv = 1.0 / best_norm.sqrt();
        for c in dir.iter_mut() {
            *c *= inv;
        }
        basis.push(dir);
        chosen.push(i);
    }
    chosen.sort_unstable();
    let mut scratch = Vec::new();
    if orientation(pts, dim, &chosen, &mut scratch).abs() <= TIE_TOL {
        return Err(GeometryError::DegenerateInput);
    }
    Ok(chosen)
}

impl<'a> Builder<'a> {
    fn n_cells(&self) -> u32 {
        (self.verts.len() / self.stride) as u32
    }

    fn cell_verts(&self, c: u32) -> &[u32] {
        let s = c as usize * self.stride;
        &self.verts[s..s + self.stride]
    }

    fn is_ghost(&self, c: u32) -> bool {
        self.verts[c as usize * self.stride + self.dim] == GHOST
    }

    /// `verts` must already be sorted ascending.
    fn push_cell(&mut self, verts: &[u32]) -> u32 {
        debug_assert!(verts.windows(2).all(|w| w[0] < w[1]));
        let id = self.n_cells();
        self.verts.extend_from_slice(verts);
        self.neigh.extend(std::iter::repeat(UNSET).take(self.stride));
        self.dead.push(false);
        self.visit.push(0);
        self.conflict_flag.push(false);
        if verts[self.dim] != GHOST {
            self.alive_real += 1;
            self.last_real = id;
        }
        id
    }

    fn facet_key(&self, c: u32, skip_slot: usize) -> FacetKey {
        let mut key = [PAD; MAX_TRI_DIM];
        let verts = self.cell_verts(c);
        let mut w = 0;
        for (j, &v) in verts.iter().enumerate() {
            if j != skip_slot {
                key[w] = v;
                w += 1;
            }
        }
        key
    }

    /// Wire all UNSET neighbor slots of the given cells against each other.
    /// Every facet must pair up exactly; anything else is a topology error.
    fn wire_fresh(&mut self, fresh: &[u32]) -> Result<(), GeometryError> {
        self.facet_map.clear();
        for &c in fresh {
            for slot in 0..self.stride {
                if self.neigh[c as usize * self.stride + slot] != UNSET {
                    continue;
                }
                let key = self.facet_key(c, slot);
                match self.facet_map.remove(&key) {
                    Some((other, oslot)) => {
                        self.neigh[c as usize * self.stride + slot] = other;
                        self.neigh[other as usize * self.stride + oslot as usize] = c;
                    }
                    None => {
                        self.facet_map.insert(key, (c, slot as u8));
                    }
                }
            }
        }
        if !self.facet_map.is_empty() {
            return Err(GeometryError::Inconsistent("cavity boundary failed to close"));
        }
        Ok(())
    }

    fn conflicts(&mut self, c: u32, p: u32) -> bool {
        let s = c as usize * self.stride;
        if self.verts[s + self.dim] == GHOST {
            let facet = &self.verts[s..s + self.dim];
            let rc = self.neigh[s + self.dim];
            debug_assert!(rc != UNSET && !self.is_ghost(rc));
            // Opposite vertex: the one vertex of the real cell not in facet.
            let rverts = self.cell_verts(rc);
            let mut opp = GHOST;
            let (mut i, mut j) = (0usize, 0usize);
            while i < rverts.len() {
                if j < facet.len() && rverts[i] == facet[j] {
                    i += 1;
                    j += 1;
                } else {
                    opp = rverts[i];
                    i += 1;
                }
            }
            debug_assert!(opp != GHOST);
            ghost_conflict(self.pts, &self.heights, self.dim, facet, opp, p, &mut self.scratch)
        } else {
            let verts = &self.verts[s..s + self.stride];
            insphere_conflict(self.pts, &self.heights, self.dim, verts, p, &mut self.scratch)
        }
    }

    /// Barycentric weights of q in real cell c; returns (slot of the most
    /// negative weight, that weight), or None if the solve is singular.
    fn min_weight(&mut self, c: u32, q: &[f64]) -> Option<(usize, f64)> {
        let n = self.stride;
        self.solve.clear();
        self.solve.resize(n * n, 0.0);
        self.rhs.clear();
        self.rhs.resize(n, 0.0);
        let s = c as usize * self.stride;
        for (col, &v) in self.verts[s..s + n].iter().enumerate() {
            self.solve[col] = 1.0;
            let xv = coords(self.pts, self.dim, v);
            for r in 0..self.dim {
                self.solve[(r + 1) * n + col] = xv[r];
            }
        }
        self.rhs[0] = 1.0;
        self.rhs[1..].copy_from_slice(q);
        if !solve_linear(&mut self.solve, &mut self.rhs, n) {
            return None;
        }
        let mut slot = 0;
        let mut wmin = f64::INFINITY;
        for (k, &w) in self.rhs.iter().enumerate() {
            if w < wmin {
                wmin = w;
                slot = k;
            }
        }
        Some((slot, wmin))
    }

    fn insert(&mut self, p: u32) -> Result<(), GeometryError> {
        let seed = self.find_seed(p)?;

        // Flood-fill the conflict cavity.
        self.epoch += 1;
        let epoch = self.epoch;
        self.cavity.clear();
        self.queue.clear();
        self.visit[seed as usize] = epoch;
        self.conflict_flag[seed as usize] = true;
        self.queue.push(seed);
        while let Some(c) = self.queue.pop() {
            self.cavity.push(c);
            for slot in 0..self.stride {
                let nb = self.neigh[c as usize * self.stride + slot];
                debug_assert!(nb != UNSET);
                if self.visit[nb as usize] != epoch {
                    self.visit[nb as usize] = epoch;
                    let hit = self.conflicts(nb, p);
                    self.conflict_flag[nb as usize] = hit;
                    if hit {
                        self.queue.push(nb);
                    }
                }
            }
        }

        // Fan new cells from p to each boundary facet.
        self.fresh.clear();
        let mut nverts = vec![0u32; self.stride];
        for ci in 0..self.cavity.len() {
            let c = self.cavity[ci];
            for slot in 0..self.stride {
                let nb = self.neigh[c as usize * self.stride + slot];
                if self.visit[nb as usize] == epoch && self.conflict_flag[nb as usize] {
                    continue; // interior facet of the cavity
                }
                // Boundary facet: cell verts minus `slot`, plus p, sorted.
                {
                    let verts = self.cell_verts(c);
                    let mut w = 0;
                    let mut placed = false;
                    for (j, &v) in verts.iter().enumerate() {
                        if j == slot {
                            continue;
                        }
                        if !placed && p < v {
                            nverts[w] = p;
                            w += 1;
                            placed = true;
                        }
                        nverts[w] = v;
                        w += 1;
                    }
                    if !placed {
                        nverts[w] = p;
                    }
                }
                let new_id = self.push_cell(&nverts);
                let slot_p = nverts.iter().position(|&v| v == p).unwrap();
                self.neigh[new_id as usize * self.stride + slot_p] = nb;
                // Retarget the outer cell's pointer from the dead cell to us.
                let ns = nb as usize * self.stride;
                let mut patched = false;
                for k in 0..self.stride {
                    if self.neigh[ns + k] == c {
                        self.neigh[ns + k] = new_id;
                        patched = true;
                        break;
                    }
                }
                if !patched {
                    return Err(GeometryError::Inconsistent("boundary neighbor retarget failed"));
                }
                self.fresh.push(new_id);
            }
        }

        for i in 0..self.cavity.len() {
            let c = self.cavity[i];
            self.dead[c as usize] = true;
            if !self.is_ghost(c) {
                self.alive_real -= 1;
            }
        }
        let fresh = std::mem::take(&mut self.fresh);
        let result = self.wire_fresh(&fresh);
        self.fresh = fresh;
        result?;

        // A successful insertion always yields at least one real cell.
        if !self.fresh.iter().any(|&c| !self.is_ghost(c)) {
            return Err(GeometryError::Inconsistent("insertion produced no real cell"));
        }
        debug_assert!(!self.is_ghost(self.last_real) && !self.dead[self.last_real as usize]);
        Ok(())
    }

    fn find_seed(&mut self, p: u32) -> Result<u32, GeometryError> {
        let q = coords(self.pts, self.dim, p).to_vec();
        let mut cur = self.last_real;
        let mut steps = 0usize;
        let bound = self.alive_real + 2;
        loop {
            steps += 1;
            if steps > bound {
                return self.scan_seed(p);
            }
            let Some((slot, wmin)) = self.min_weight(cur, &q) else {
                return self.scan_seed(p);
            };
            if wmin >= -1e-12 {
                // Containing cell; it must conflict unless numerics disagree.
                if self.conflicts(cur, p) {
                    return Ok(cur);
                }
                return self.scan_seed(p);
            }
            let nb = self.neigh[cur as usize * self.stride + slot];
            if self.is_ghost(nb) {
                if let Some(g) = self.ghost_seed(nb, p) {
                    return Ok(g);
                }
                return self.scan_seed(p);
            }
            cur = nb;
        }
    }

    /// Breadth-first search over the hull (ghost-ghost adjacency) for a
    /// conflicting ghost cell.
    fn ghost_seed(&mut self, start: u32, p: u32) -> Option<u32> {
        self.epoch += 1;
        let epoch = self.epoch;
        self.queue.clear();
        self.queue.push(start);
        self.visit[start as usize] = epoch;
        let mut head = 0;
        while head < self.queue.len() {
            let g = self.queue[head];
            head += 1;
            if self.conflicts(g, p) {
                self.queue.clear();
                return Some(g);
            }
            for slot in 0..self.dim {
                let nb = self.neigh[g as usize * self.stride + slot];
                if self.is_ghost(nb) && self.visit[nb as usize] != epoch {
                    self.visit[nb as usize] = epoch;
                    self.queue.push(nb);
                }
            }
        }
        self.queue.clear();
        None
    }

    fn scan_seed(&mut self, p: u32) -> Result<u32, GeometryError> {
        for c in 0..self.n_cells() {
            if !self.dead[c as usize] && self.conflicts(c, p) {
                return Ok(c);
            }
        }
        Err(GeometryError::Inconsistent("no conflicting cell for inserted point"))
    }

    fn compact(&self) -> RawComplex {
        let n_cells = self.n_cells();
        let mut remap = vec![BOUNDARY; n_cells as usize];
        let mut next = 0u32;
        for c in 0..n_cells {
            if !self.dead[c as usize] && !self.is_ghost(c) {
                remap[c as usize] = next;
                next += 1;
            }
        }
        let mut simplices = Vec::with_capacity(next as usize * self.stride);
        let mut neighbors = Vec::with_capacity(next as usize * self.stride);
        for c in 0..n_cells {
            if remap[c as usize] == BOUNDARY {
                continue;
            }
            let s = c as usize * self.stride;
            simplices.extend_from_slice(&self.verts[s..s + self.stride]);
            for k in 0..self.stride {
                let nb = self.neigh[s + k];
                neighbors.push(if nb == UNSET { BOUNDARY } else { remap[nb as usize] });
            }
        }
        RawComplex { simplices, neighbors }
    }
}

/// Solve `A x = b` in place by Gaussian elimination with partial pivoting;
/// returns false if a pivot is numerically zero. On success `b` holds `x`.
pub(super) fn solve_linear(a: &mut [f64], b: &mut [f64], n: usize) -> bool {
    for col in 0..n {
        let mut piv = col;
        let mut best = a[col * n + col].abs();
        for r in (col + 1)..n {
            let v = a[r * n + col].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best < 1e-300 {
            return false;
        }
        if piv != col {
            for c in col..n {
                a.swap(col * n + c, piv * n + c);
            }
            b.swap(col, piv);
        }
        let inv = 1.0 / a[col * n + col];
        for r in (col + 1)..n {
            let f = a[r * n + col] * inv;
            if f != 0.0 {
                for c in (col + 1)..n {
                    a[r * n + c] -= f * a[col * n + c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    for col in (0..n).rev() {
        let mut x = b[col];
        for c in (col + 1)..n {
            x -= a[col * n + c] * b[c];
        }
        b[col] = x / a[col * n + col];
    }
    true
}
