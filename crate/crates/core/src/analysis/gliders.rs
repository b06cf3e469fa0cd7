//! Glider tracking on ether-filtered diagrams.
//!
//! Live cells of each row are grouped into blobs; blobs in consecutive rows
//! are linked when some pair of their cells is at most one column apart.
//! Maximal one-to-one runs of links form chains. A chain whose shape recurs
//! with a fixed displacement becomes a [`Track`]; every other chain and every
//! branching link is glued into an interaction region, and the tracks that
//! enter and leave a region decide its [`EventKind`].

use serde::{Deserialize, Serialize};

use crate::diagram::SpaceTimeDiagram;
use crate::generation::Boundary;

/// Longest shape recurrence accepted for a track.
pub const MAX_TRACK_PERIOD: usize = 16;
/// Minimum number of steps a chain must be periodic to count as a track.
pub const MIN_TRACK_STEPS: usize = 8;
/// Cells of one row separated by at most this many dead cells share a blob.
pub const BLOB_GAP: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    Track,
    Collision,
    Gun,
    BlackHole,
}

/// A glider trajectory. `positions[k]` is the left edge of the glider at step
/// `t_start + k`, unwrapped across a periodic seam.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Track {
    pub t_start: usize,
    pub positions: Vec<i64>,
    pub velocity: f64,
    pub period: usize,
    #[serde(skip)]
    displacement: i64,
}

impl Track {
    pub fn t_end(&self) -> usize {
        self.t_start + self.positions.len() - 1
    }

    /// Position the track would have at step `t`, continued by whole
    /// periods from the nearest end so the glider phase is respected.
    pub fn project(&self, t: usize) -> i64 {
        let p = self.period as i64;
        let (t, t0, t1) = (t as i64, self.t_start as i64, self.t_end() as i64);
        let at = |s: i64| self.positions[(s - t0) as usize];
        if t < t0 {
            let m = (t0 - t + p - 1) / p;
            at(t + m * p) - m * self.displacement
        } else if t > t1 {
            let m = (t - t1 + p - 1) / p;
            at(t - m * p) + m * self.displacement
        } else {
            at(t)
        }
    }

    fn same_velocity(&self, other: &Track) -> bool {
        self.displacement * other.period as i64 == other.displacement * self.period as i64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GliderEvent {
    pub kind: EventKind,
    pub time_span: (usize, usize),
    /// Incoming tracks first, then outgoing ones.
    pub tracks: Vec<Track>,
    pub incoming: usize,
    pub phase_shift: Option<i64>,
}

impl GliderEvent {
    pub fn incoming_tracks(&self) -> &[Track] {
        &self.tracks[..self.incoming]
    }

    pub fn outgoing_tracks(&self) -> &[Track] {
        &self.tracks[self.incoming..]
    }
}

#[derive(Debug, Clone)]
struct Blob {
    lo: i64,
    shape: Vec<bool>,
}

impl Blob {
    fn cells(&self) -> impl Iterator<Item = i64> + '_ {
        self.shape.iter().enumerate().filter(|(_, &b)| b).map(move |(k, _)| self.lo + k as i64)
    }
}

fn row_blobs(cells: &[bool], periodic: bool) -> Vec<Blob> {
    let n = cells.len();
    let Some(first_dead) = cells.iter().position(|&c| !c) else {
        return vec![Blob { lo: 0, shape: vec![true; n] }];
    };
    // on a ring, scan from a dead cell so no blob straddles the start
    let start = if periodic { first_dead } else { 0 };
    let mut blobs: Vec<Blob> = Vec::new();
    let mut current: Option<(i64, i64, Vec<i64>)> = None;
    for k in 0..n {
        let x = start + k;
        if !cells[x % n] {
            continue;
        }
        let x = x as i64;
        match &mut current {
            Some((_, hi, members)) if x - *hi <= BLOB_GAP as i64 + 1 => {
                *hi = x;
                members.push(x);
            }
            _ => {
                if let Some(done) = current.take() {
                    blobs.push(finish_blob(done, n));
                }
                current = Some((x, x, vec![x]));
            }
        }
    }
    if let Some(done) = current {
        blobs.push(finish_blob(done, n));
    }
    if periodic && blobs.len() > 1 {
        // join the last blob with the first across the seam
        let first_lo = blobs[0].lo;
        let last = blobs.last().unwrap();
        let last_hi = last.lo + last.shape.len() as i64 - 1;
        let gap = first_lo + n as i64 - last_hi - 1;
        if gap <= BLOB_GAP as i64 {
            let first = blobs.remove(0);
            let last = blobs.last_mut().unwrap();
            let offset = first.lo + n as i64 - last.lo;
            last.shape.resize(offset as usize, false);
            last.shape.extend(first.shape);
        }
    }
    blobs
}

fn finish_blob((lo, hi, members): (i64, i64, Vec<i64>), n: usize) -> Blob {
    let mut shape = vec![false; (hi - lo + 1) as usize];
    for m in members {
        shape[(m - lo) as usize] = true;
    }
    let lo = lo.rem_euclid(n as i64);
    Blob { lo, shape }
}

fn linked(a: &Blob, b: &Blob, width: i64, periodic: bool) -> bool {
    let near: Vec<i64> = a.cells().collect();
    b.cells().any(|y| {
        near.iter().any(|&x| {
            let d = (x - y).abs();
            let d = if periodic { d.rem_euclid(width).min((-d).rem_euclid(width)) } else { d };
            d <= 1
        })
    })
}

/// Signed displacement from `from` to `to` on a ring of `width` cells.
fn wrap_delta(from: i64, to: i64, width: i64, periodic: bool) -> i64 {
    if !periodic {
        return to - from;
    }
    let d = (to - from).rem_euclid(width);
    if d > width / 2 {
        d - width
    } else {
        d
    }
}

struct Chain {
    t_start: usize,
    blobs: Vec<usize>,
    track: Option<Track>,
}

/// Looks for the period and displacement under which the longest stretch of
/// the chain repeats its own shape.
fn periodic_fit(t_start: usize, shapes: &[&[bool]], positions: &[i64]) -> Option<Track> {
    let len = shapes.len();
    let mut best: Option<(usize, usize, usize, i64)> = None; // (covered, p, first, d)
    for p in 1..=MAX_TRACK_PERIOD.min(len.saturating_sub(1)) {
        let mut k = 0;
        while k + p < len {
            let d = positions[k + p] - positions[k];
            let mut end = k;
            while end + p < len && shapes[end + p] == shapes[end] && positions[end + p] - positions[end] == d {
                end += 1;
            }
            if end > k {
                let covered = end - k + p;
                if best.is_none_or(|(c, ..)| covered > c) {
                    best = Some((covered, p, k, d));
                }
                k = end;
            } else {
                k += 1;
            }
        }
    }
    let (covered, period, _, displacement) = best?;
    if covered < MIN_TRACK_STEPS.max(2 * period) || 2 * covered < len {
        return None;
    }
    Some(Track {
        t_start,
        positions: positions.to_vec(),
        velocity: displacement as f64 / period as f64,
        period,
        displacement,
    })
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.0[root] != root {
            root = self.0[root];
        }
        let mut y = x;
        while self.0[y] != root {
            let next = self.0[y];
            self.0[y] = root;
            y = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra] = rb;
        }
    }
}

#[derive(Default)]
struct Region {
    incoming: Vec<usize>,
    outgoing: Vec<usize>,
    t_min: usize,
    t_max: usize,
    has_body: bool,
}

/// Extracts tracks and their interactions from a filtered diagram.
pub fn extract_glider_events(filtered: &SpaceTimeDiagram) -> Vec<GliderEvent> {
    let width = filtered.width() as i64;
    let periodic = filtered.boundary() == Boundary::Periodic;
    let last_step = filtered.steps();

    // blobs per row, flattened with a row index
    let mut blobs: Vec<Blob> = Vec::new();
    let mut row_of: Vec<usize> = Vec::new();
    let mut row_start: Vec<usize> = Vec::new();
    for (t, row) in filtered.rows().iter().enumerate() {
        row_start.push(blobs.len());
        for b in row_blobs(&row.to_bits(), periodic) {
            blobs.push(b);
            row_of.push(t);
        }
    }
    row_start.push(blobs.len());
    if blobs.is_empty() {
        return Vec::new();
    }

    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); blobs.len()];
    let mut pred: Vec<Vec<usize>> = vec![Vec::new(); blobs.len()];
    for t in 0..last_step {
        for a in row_start[t]..row_start[t + 1] {
            for b in row_start[t + 1]..row_start[t + 2] {
                if linked(&blobs[a], &blobs[b], width, periodic) {
                    succ[a].push(b);
                    pred[b].push(a);
                }
            }
        }
    }

    // chains of exclusive links
    let exclusive = |a: usize, b: usize| succ[a] == [b] && pred[b] == [a];
    let mut chain_of = vec![usize::MAX; blobs.len()];
    let mut chains: Vec<Chain> = Vec::new();
    for start in 0..blobs.len() {
        if chain_of[start] != usize::MAX {
            continue;
        }
        let mut members = vec![start];
        let mut cur = start;
        while succ[cur].len() == 1 && exclusive(cur, succ[cur][0]) {
            cur = succ[cur][0];
            members.push(cur);
        }
        let id = chains.len();
        for &m in &members {
            chain_of[m] = id;
        }
        let mut positions = vec![blobs[start].lo];
        for w in members.windows(2) {
            let delta = wrap_delta(blobs[w[0]].lo, blobs[w[1]].lo, width, periodic);
            positions.push(positions.last().unwrap() + delta);
        }
        let shapes: Vec<&[bool]> = members.iter().map(|&m| blobs[m].shape.as_slice()).collect();
        let track = periodic_fit(row_of[start], &shapes, &positions);
        chains.push(Chain {
            t_start: row_of[start],
            blobs: members,
            track,
        });
    }

    // node 2c is the start of chain c, 2c+1 its end; non-tracks are glued
    let mut uf = UnionFind((0..2 * chains.len()).collect());
    for (c, chain) in chains.iter().enumerate() {
        if chain.track.is_none() {
            uf.union(2 * c, 2 * c + 1);
        }
    }
    for a in 0..blobs.len() {
        for &b in &succ[a] {
            if !exclusive(a, b) {
                uf.union(2 * chain_of[a] + 1, 2 * chain_of[b]);
            }
        }
    }
    let starts_free: Vec<bool> = chains.iter().map(|c| pred[c.blobs[0]].is_empty()).collect();
    let ends_free: Vec<bool> = chains.iter().map(|c| succ[*c.blobs.last().unwrap()].is_empty()).collect();
    // a region fed by a single track is that track's source splitting off
    // gliders, so it belongs to the same persistent structure
    loop {
        let mut feeds: std::collections::HashMap<usize, Vec<usize>> = std::collections::HashMap::new();
        for c in 0..chains.len() {
            if chains[c].track.is_some() && !ends_free[c] && uf.find(2 * c) != uf.find(2 * c + 1) {
                feeds.entry(uf.find(2 * c + 1)).or_default().push(c);
            }
        }
        let merge = feeds.values().filter(|f| f.len() == 1).map(|f| f[0]).find(|&c| !starts_free[c]);
        match merge {
            Some(c) => uf.union(2 * c, 2 * c + 1),
            None => break,
        }
    }
    // a track that leaves and re-enters the same region is part of it
    for c in 0..chains.len() {
        if chains[c].track.is_some() && uf.find(2 * c) == uf.find(2 * c + 1) {
            chains[c].track = None;
        }
    }

    let mut regions: std::collections::BTreeMap<usize, Region> = std::collections::BTreeMap::new();
    for (c, chain) in chains.iter().enumerate() {
        let t_end = chain.t_start + chain.blobs.len() - 1;
        let (starts_free, ends_free) = (starts_free[c], ends_free[c]);
        match chain.track {
            Some(_) => {
                if !starts_free {
                    let r = regions.entry(uf.find(2 * c)).or_insert_with(|| Region::at(chain.t_start));
                    r.outgoing.push(c);
                    r.touch(chain.t_start);
                }
                if !ends_free {
                    let r = regions.entry(uf.find(2 * c + 1)).or_insert_with(|| Region::at(t_end));
                    r.incoming.push(c);
                    r.touch(t_end);
                } else if t_end < last_step {
                    // the track dies on its own
                    let r = regions.entry(uf.find(2 * c + 1)).or_insert_with(|| Region::at(t_end));
                    r.incoming.push(c);
                    r.touch(t_end);
                }
            }
            None => {
                let r = regions.entry(uf.find(2 * c)).or_insert_with(|| Region::at(chain.t_start));
                r.touch(chain.t_start);
                r.touch(t_end);
                r.has_body = true;
            }
        }
    }

    let track = |c: usize| chains[c].track.clone().expect("region members are tracks");
    let mut events: Vec<GliderEvent> = chains
        .iter()
        .filter_map(|c| c.track.clone())
        .map(|t| GliderEvent {
            kind: EventKind::Track,
            time_span: (t.t_start, t.t_end()),
            tracks: vec![t],
            incoming: 0,
            phase_shift: None,
        })
        .collect();
    for region in regions.values() {
        let incoming: Vec<Track> = region.incoming.iter().map(|&c| track(c)).collect();
        let outgoing: Vec<Track> = region.outgoing.iter().map(|&c| track(c)).collect();
        let kind = if is_gun(&outgoing) {
            EventKind::Gun
        } else if incoming.len() >= 2 && !outgoing.is_empty() {
            EventKind::Collision
        } else if !incoming.is_empty() && outgoing.is_empty() && (incoming.len() >= 2 || region.has_body) {
            EventKind::BlackHole
        } else {
            continue;
        };
        let phase_shift = (kind == EventKind::Collision).then(|| phase_shift(&incoming, &outgoing, width, periodic)).flatten();
        let n_in = incoming.len();
        let mut tracks = incoming;
        tracks.extend(outgoing);
        events.push(GliderEvent {
            kind,
            time_span: (region.t_min, region.t_max),
            tracks,
            incoming: n_in,
            phase_shift,
        });
    }
    events.sort_by_key(|e| (e.time_span, e.kind as u8));
    events
}

impl Region {
    fn at(t: usize) -> Self {
        Region {
            t_min: t,
            t_max: t,
            ..Default::default()
        }
    }

    fn touch(&mut self, t: usize) {
        self.t_min = self.t_min.min(t);
        self.t_max = self.t_max.max(t);
    }
}

/// At least two outgoing tracks of one velocity, emitted at distinct and
/// evenly spaced times.
fn is_gun(outgoing: &[Track]) -> bool {
    let mut used = vec![false; outgoing.len()];
    for i in 0..outgoing.len() {
        if used[i] {
            continue;
        }
        let mut starts: Vec<usize> = Vec::new();
        for j in i..outgoing.len() {
            if outgoing[j].same_velocity(&outgoing[i]) {
                used[j] = true;
                starts.push(outgoing[j].t_start);
            }
        }
        starts.sort_unstable();
        starts.dedup();
        if starts.len() >= 2 && evenly_spaced(&starts) {
            return true;
        }
    }
    false
}

fn evenly_spaced(starts: &[usize]) -> bool {
    let gaps: Vec<usize> = starts.windows(2).map(|w| w[1] - w[0]).collect();
    let (lo, hi) = (*gaps.iter().min().unwrap(), *gaps.iter().max().unwrap());
    // emission times jitter by the glider's own period
    hi - lo <= 4.min(lo)
}

/// Offset between where an outgoing track is and where the matching incoming
/// track would have been without the collision; the largest offset wins.
fn phase_shift(incoming: &[Track], outgoing: &[Track], width: i64, periodic: bool) -> Option<i64> {
    let mut taken = vec![false; outgoing.len()];
    let mut best: Option<i64> = None;
    for inc in incoming {
        let Some(j) = (0..outgoing.len()).find(|&j| !taken[j] && outgoing[j].same_velocity(inc)) else {
            continue;
        };
        taken[j] = true;
        let out = &outgoing[j];
        let shift = wrap_delta(inc.project(out.t_start), out.positions[0], width, periodic);
        if best.is_none_or(|b| shift.abs() > b.abs()) {
            best = Some(shift);
        }
    }
    best
}

/// Velocity multiset equality, up to exact rational velocity.
pub fn same_velocities(a: &[Track], b: &[Track]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut taken = vec![false; b.len()];
    a.iter().all(|x| match (0..b.len()).find(|&j| !taken[j] && b[j].same_velocity(x)) {
        Some(j) => {
            taken[j] = true;
            true
        }
        None => false,
    })
}
