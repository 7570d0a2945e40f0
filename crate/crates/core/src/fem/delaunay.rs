//! Constrained Delaunay triangulation kernel (Bowyer–Watson insertion with
//! exact orientation and in-circle predicates).

use std::collections::HashMap;

use robust::{incircle, orient2d, Coord};

pub(crate) const NONE: u32 = u32::MAX;

#[derive(Clone, Copy, Debug)]
pub(crate) struct Tri {
    pub v: [u32; 3],
    /// `n[i]` is the neighbour across the edge opposite `v[i]`.
    pub n: [u32; 3],
    pub alive: bool,
    pub inside: bool,
}

#[derive(Debug)]
pub(crate) enum Locate {
    Found(u32),
    /// The straight walk hit this constrained edge.
    Blocked(u32, u32),
}

#[derive(Debug, thiserror::Error)]
pub(crate) enum TriError {
    #[error("point ({0}, {1}) duplicates an existing vertex")]
    Duplicate(f64, f64),
    #[error("degenerate cavity while inserting ({0}, {1})")]
    Degenerate(f64, f64),
    #[error("point location did not terminate")]
    Lost,
}

pub(crate) struct Cavity {
    pub tris: Vec<u32>,
    /// Boundary edges `(a, b, outer neighbour, owner inside flag)`, CCW as seen from inside.
    pub edges: Vec<(u32, u32, u32, bool)>,
}

pub(crate) struct Triangulation {
    pub pts: Vec<[f64; 2]>,
    pub tris: Vec<Tri>,
    free: Vec<u32>,
    constraints: HashMap<(u32, u32), u32>,
    vert_tri: Vec<u32>,
    last: u32,
    rng: u64,
    pub created: Vec<u32>,
    stamp: Vec<u32>,
    epoch: u32,
}

fn key(a: u32, b: u32) -> (u32, u32) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

fn c(p: [f64; 2]) -> Coord<f64> {
    Coord { x: p[0], y: p[1] }
}

pub(crate) fn orient(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> f64 {
    orient2d(c(a), c(b), c(p))
}

pub(crate) fn circumcenter(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> [f64; 2] {
    let (bx, by) = (b[0] - a[0], b[1] - a[1]);
    let (cx, cy) = (p[0] - a[0], p[1] - a[1]);
    let d = 2.0 * (bx * cy - by * cx);
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    [a[0] + (cy * b2 - by * c2) / d, a[1] + (bx * c2 - cx * b2) / d]
}

impl Triangulation {
    /// Empty triangulation inside a super-triangle enclosing the box.
    pub fn new(lo: [f64; 2], hi: [f64; 2]) -> Self {
        let cx = 0.5 * (lo[0] + hi[0]);
        let cy = 0.5 * (lo[1] + hi[1]);
        let r = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-300) * 20.0;
        let pts = vec![[cx - 2.0 * r, cy - r], [cx + 2.0 * r, cy - r], [cx, cy + 2.0 * r]];
        let tri = Tri { v: [0, 1, 2], n: [NONE; 3], alive: true, inside: false };
        Self {
            pts,
            tris: vec![tri],
            free: Vec::new(),
            constraints: HashMap::new(),
            vert_tri: vec![0, 0, 0],
            last: 0,
            rng: 0x9E37_79B9_7F4A_7C15,
            created: Vec::new(),
            stamp: vec![0],
            epoch: 0,
        }
    }

    pub const SUPER: u32 = 3;

    fn next_rand(&mut self) -> u64 {
        self.rng ^= self.rng << 13;
        self.rng ^= self.rng >> 7;
        self.rng ^= self.rng << 17;
        self.rng
    }

    pub fn is_constraint(&self, a: u32, b: u32) -> bool {
        self.constraints.contains_key(&key(a, b))
    }

    pub fn constraint_id(&self, a: u32, b: u32) -> Option<u32> {
        self.constraints.get(&key(a, b)).copied()
    }

    pub fn add_constraint(&mut self, a: u32, b: u32, id: u32) {
        self.constraints.insert(key(a, b), id);
    }

    pub fn remove_constraint(&mut self, a: u32, b: u32) {
        self.constraints.remove(&key(a, b));
    }

    /// A live triangle containing `v`.
    pub fn triangle_at(&self, v: u32) -> u32 {
        self.vert_tri[v as usize]
    }

    /// Live triangle in which `a → b` is a CCW edge, with the index of the
    /// vertex opposite it.
    pub fn edge_triangle(&self, a: u32, b: u32) -> Option<(u32, usize)> {
        let start = self.vert_tri[a as usize];
        let mut t = start;
        // Rotate around `a`; super-triangle vertices are never queried.
        for _ in 0..100_000 {
            let tri = &self.tris[t as usize];
            let i = tri.v.iter().position(|&x| x == a)?;
            if tri.v[(i + 1) % 3] == b {
                return Some((t, (i + 2) % 3));
            }
            let next = tri.n[(i + 1) % 3];
            if next == NONE || next == start {
                return None;
            }
            t = next;
        }
        None
    }

    /// Straight visibility walk from `start` towards `p`.
    pub fn locate(&mut self, p: [f64; 2], start: u32, stop_at_constraints: bool) -> Result<Locate, TriError> {
        let mut t = if self.tris[start as usize].alive { start } else { self.last };
        for _ in 0..10_000_000 {
            let tri = self.tris[t as usize];
            let off = (self.next_rand() % 3) as usize;
            let mut moved = false;
            for k in 0..3 {
                let i = (k + off) % 3;
                let a = tri.v[(i + 1) % 3];
                let b = tri.v[(i + 2) % 3];
                if orient(self.pts[a as usize], self.pts[b as usize], p) < 0.0 {
                    if stop_at_constraints && self.is_constraint(a, b) {
                        return Ok(Locate::Blocked(a, b));
                    }
                    let nb = tri.n[i];
                    if nb == NONE {
                        return Err(TriError::Lost);
                    }
                    t = nb;
                    moved = true;
                    break;
                }
            }
            if !moved {
                return Ok(Locate::Found(t));
            }
        }
        Err(TriError::Lost)
    }

    fn in_circle(&self, t: u32, p: [f64; 2]) -> bool {
        let v = self.tris[t as usize].v;
        incircle(c(self.pts[v[0] as usize]), c(self.pts[v[1] as usize]), c(self.pts[v[2] as usize]), c(p)) > 0.0
    }

    /// Bowyer–Watson cavity of `p` seeded at `t0`, not crossing constraints
    /// other than `allow`.
    pub fn cavity(&mut self, p: [f64; 2], t0: u32, allow: Option<(u32, u32)>) -> Cavity {
        self.epoch += 1;
        if self.stamp.len() < self.tris.len() {
            self.stamp.resize(self.tris.len(), 0);
        }
        let epoch = self.epoch;
        let allowed = allow.map(|(a, b)| key(a, b));
        let mut tris = vec![t0];
        self.stamp[t0 as usize] = epoch;
        let mut edges = Vec::new();
        let mut k = 0;
        while k < tris.len() {
            let t = tris[k];
            k += 1;
            let tri = self.tris[t as usize];
            for i in 0..3 {
                let a = tri.v[(i + 1) % 3];
                let b = tri.v[(i + 2) % 3];
                let nb = tri.n[i];
                if nb != NONE && self.stamp[nb as usize] == epoch {
                    continue;
                }
                let blocked = self.is_constraint(a, b) && allowed != Some(key(a, b));
                if nb != NONE && !blocked && self.in_circle(nb, p) {
                    self.stamp[nb as usize] = epoch;
                    tris.push(nb);
                } else {
                    edges.push((a, b, nb, tri.inside));
                }
            }
        }
        Cavity { tris, edges }
    }

    fn alloc(&mut self, tri: Tri) -> u32 {
        if let Some(id) = self.free.pop() {
            self.tris[id as usize] = tri;
            id
        } else {
            self.tris.push(tri);
            self.stamp.push(0);
            (self.tris.len() - 1) as u32
        }
    }

    /// Inserts `p`, which must lie in the (possibly constrained) cavity
    /// seeded at `t0`. New triangles are listed in `self.created`.
    pub fn insert_in_cavity(&mut self, p: [f64; 2], cav: Cavity) -> Result<u32, TriError> {
        for &(a, b, _, _) in &cav.edges {
            if orient(self.pts[a as usize], self.pts[b as usize], p) <= 0.0 {
                let pa = self.pts[a as usize];
                let pb = self.pts[b as usize];
                if pa == p || pb == p {
                    return Err(TriError::Duplicate(p[0], p[1]));
                }
                return Err(TriError::Degenerate(p[0], p[1]));
            }
        }
        let v = self.pts.len() as u32;
        self.pts.push(p);
        self.vert_tri.push(NONE);
        for &t in &cav.tris {
            self.tris[t as usize].alive = false;
            self.free.push(t);
        }
        self.created.clear();
        let mut by_start: HashMap<u32, u32> = HashMap::with_capacity(cav.edges.len());
        let mut by_end: HashMap<u32, u32> = HashMap::with_capacity(cav.edges.len());
        let mut new_ids = Vec::with_capacity(cav.edges.len());
        for &(a, b, outer, inside) in &cav.edges {
            let id = self.alloc(Tri { v: [a, b, v], n: [NONE, NONE, outer], alive: true, inside });
            if outer != NONE {
                let o = &mut self.tris[outer as usize];
                for j in 0..3 {
                    let oa = o.v[(j + 1) % 3];
                    let ob = o.v[(j + 2) % 3];
                    if oa == b && ob == a {
                        o.n[j] = id;
                    }
                }
            }
            by_start.insert(a, id);
            by_end.insert(b, id);
            new_ids.push(id);
        }
        for &id in &new_ids {
            let [a, b, _] = self.tris[id as usize].v;
            // Edge (b, v) is opposite a; edge (v, a) is opposite b.
            let across_bv = *by_start.get(&b).ok_or(TriError::Degenerate(p[0], p[1]))?;
            let across_va = *by_end.get(&a).ok_or(TriError::Degenerate(p[0], p[1]))?;
            let tri = &mut self.tris[id as usize];
            tri.n[0] = across_bv;
            tri.n[1] = across_va;
            self.vert_tri[a as usize] = id;
            self.vert_tri[b as usize] = id;
        }
        self.vert_tri[v as usize] = new_ids[0];
        self.last = new_ids[0];
        self.created = new_ids;
        Ok(v)
    }

    /// Locates and inserts `p` (unconstrained walk).
    pub fn insert(&mut self, p: [f64; 2], hint: u32, allow: Option<(u32, u32)>) -> Result<u32, TriError> {
        let t0 = match self.locate(p, hint, false)? {
            Locate::Found(t) => t,
            Locate::Blocked(..) => unreachable!("unconstrained walk"),
        };
        let cav = self.cavity(p, t0, allow);
        self.insert_in_cavity(p, cav)
    }

    pub fn last(&self) -> u32 {
        self.last
    }

    /// Marks triangles reachable from `seeds` without crossing constraints.
    pub fn flood_inside(&mut self, seeds: &[u32]) {
        for t in self.tris.iter_mut() {
            t.inside = false;
        }
        let mut stack: Vec<u32> = seeds.to_vec();
        while let Some(t) = stack.pop() {
            if self.tris[t as usize].inside || !self.tris[t as usize].alive {
                continue;
            }
            self.tris[t as usize].inside = true;
            let tri = self.tris[t as usize];
            for i in 0..3 {
                let nb = tri.n[i];
                if nb != NONE && !self.is_constraint(tri.v[(i + 1) % 3], tri.v[(i + 2) % 3]) {
                    stack.push(nb);
                }
            }
        }
    }

    pub fn live_triangles(&self) -> impl Iterator<Item = (u32, &Tri)> {
        self.tris.iter().enumerate().filter(|(_, t)| t.alive).map(|(i, t)| (i as u32, t))
    }
}
