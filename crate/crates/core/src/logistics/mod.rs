//! Occupancy model of all zones, conditional SZ→MZ fill planning after MCM,
//! and the LZ→SZ replenishment sequence with timing and coherence-cost
//! accounting.
//!
//! Moves travel the inter-column-pair "highways", so the path metric is
//! Manhattan distance restricted to those vertical lanes. Planning is a pure
//! function of an occupancy snapshot; execution mutates it stochastically.

pub mod assign;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Site, ZoneKind, ZoneLayout};
use crate::engine::noise::NoiseModel;
use crate::rng::ShotRng;

/// Per-zone boolean occupancy with site coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZoneOccupancy {
    layout: ZoneLayout,
    occupied: Vec<Vec<bool>>,
}

impl ZoneOccupancy {
    pub fn empty(layout: ZoneLayout) -> Self {
        let occupied = ZoneKind::ALL
            .iter()
            .map(|&k| vec![false; layout.zone(k).capacity as usize])
            .collect();
        ZoneOccupancy { layout, occupied }
    }

    /// Standard start-of-circuit state: storage zone fully stocked.
    pub fn with_full_reservoir(layout: ZoneLayout) -> Self {
        let mut occ = Self::empty(layout);
        let cap = occ.capacity(ZoneKind::Sz);
        for i in 0..cap {
            occ.set(Site::new(ZoneKind::Sz, i), true);
        }
        occ
    }

    fn zone_index(kind: ZoneKind) -> usize {
        ZoneKind::ALL.iter().position(|&k| k == kind).unwrap()
    }

    pub fn layout(&self) -> &ZoneLayout {
        &self.layout
    }

    pub fn capacity(&self, kind: ZoneKind) -> u32 {
        self.layout.zone(kind).capacity
    }

    pub fn is_occupied(&self, site: Site) -> bool {
        self.occupied[Self::zone_index(site.zone)][site.index as usize]
    }

    pub fn set(&mut self, site: Site, value: bool) {
        self.occupied[Self::zone_index(site.zone)][site.index as usize] = value;
    }

    pub fn count(&self, kind: ZoneKind) -> usize {
        self.occupied[Self::zone_index(kind)].iter().filter(|&&b| b).count()
    }

    /// Reservoir depth: occupied storage-zone sites.
    pub fn reservoir_depth(&self) -> usize {
        self.count(ZoneKind::Sz)
    }

    pub fn occupied_sites(&self, kind: ZoneKind) -> Vec<Site> {
        self.occupied[Self::zone_index(kind)]
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| Site::new(kind, i as u32))
            .collect()
    }

    pub fn vacant_sites(&self, kind: ZoneKind) -> Vec<Site> {
        self.occupied[Self::zone_index(kind)]
            .iter()
            .enumerate()
            .filter(|(_, &b)| !b)
            .map(|(i, _)| Site::new(kind, i as u32))
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Highway path metric
// ---------------------------------------------------------------------------

/// Vertical stacking offset of each zone's row 0, in row units. The register
/// sits on top, then a gap of service rows, then the 459 nm group (IZ above
/// MZ above SZ), then the loading array.
fn zone_row_offset(kind: ZoneKind) -> i64 {
    match kind {
        ZoneKind::Register => 0,
        ZoneKind::Iz => 17,
        ZoneKind::Mz => 18,
        ZoneKind::Sz => 20,
        ZoneKind::Lz => 23,
    }
}

/// Doubled gap-column coordinates: highways run between column pairs
/// (after columns 1, 3, …) plus the two outer edges.
fn highway_positions() -> impl Iterator<Item = i64> {
    (0..9).map(|k| -1 + 4 * k)
}

/// Path length between two sites in half-column units, traveling only along
/// inter-pair highways for vertical motion.
pub fn site_distance2(layout: &ZoneLayout, a: Site, b: Site) -> u64 {
    if a == b {
        return 0;
    }
    let (ra, ca) = a.row_col(layout);
    let (rb, cb) = b.row_col(layout);
    let ya = zone_row_offset(a.zone) + ra as i64;
    let yb = zone_row_offset(b.zone) + rb as i64;
    let dy = 2 * (ya - yb).abs();
    let ca2 = 2 * ca as i64;
    let cb2 = 2 * cb as i64;
    if ya == yb {
        return (dy + (ca2 - cb2).abs()) as u64;
    }
    // Enter a highway near the source, travel vertically, exit near the
    // destination.
    let mut best = i64::MAX;
    for g1 in highway_positions() {
        for g2 in highway_positions() {
            let len = (ca2 - g1).abs() + (g1 - g2).abs() + (g2 - cb2).abs();
            best = best.min(len);
        }
    }
    (dy + best) as u64
}

// ---------------------------------------------------------------------------
// Move planning
// ---------------------------------------------------------------------------

/// Ordered single-tweezer moves with a software-latency estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MovePlan {
    pub moves: Vec<(Site, Site)>,
    /// Planner software latency: affine in the move count.
    pub estimated_latency_ms: f64,
    /// Total path length in half-column units.
    pub path_length2: u64,
}

impl MovePlan {
    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum FillError {
    #[error("insufficient reservoir: {needed} vacancies but only {available} source atoms")]
    InsufficientReservoir { needed: usize, available: usize },
    #[error("move from empty source {0}")]
    EmptySource(Site),
    #[error("move to occupied destination {0}")]
    OccupiedDestination(Site),
}

/// Size cap for the exact assignment solver; larger instances fall back to
/// greedy nearest-source.
pub const EXACT_ASSIGNMENT_CAP: usize = 64;

/// Plans moves filling every vacancy from distinct occupied source sites,
/// minimizing the total highway path length (exact for up to
/// [`EXACT_ASSIGNMENT_CAP`] vacancies).
pub fn plan_moves(
    vacancies: &[Site],
    sources: &[Site],
    layout: &ZoneLayout,
    base_latency_ms: f64,
    per_move_ms: f64,
) -> Result<MovePlan, FillError> {
    if vacancies.len() > sources.len() {
        return Err(FillError::InsufficientReservoir {
            needed: vacancies.len(),
            available: sources.len(),
        });
    }
    let cost: Vec<Vec<f64>> = vacancies
        .iter()
        .map(|&v| sources.iter().map(|&s| site_distance2(layout, s, v) as f64).collect())
        .collect();
    let assignment = if vacancies.len() <= EXACT_ASSIGNMENT_CAP {
        assign::hungarian(&cost)
    } else {
        assign::greedy_nearest(&cost)
    };
    let moves: Vec<(Site, Site)> = assignment
        .iter()
        .enumerate()
        .map(|(r, &c)| (sources[c], vacancies[r]))
        .collect();
    let path_length2 = moves
        .iter()
        .map(|&(s, d)| site_distance2(layout, s, d))
        .sum();
    Ok(MovePlan {
        estimated_latency_ms: base_latency_ms + per_move_ms * moves.len() as f64,
        moves,
        path_length2,
    })
}

/// Plans the post-MCM conditional fill: one distinct SZ source per MZ
/// vacancy, from the most recent images.
pub fn plan_fill(
    mz_vacancies: &[Site],
    occupancy: &ZoneOccupancy,
    noise: &NoiseModel,
) -> Result<MovePlan, FillError> {
    let sources = occupancy.occupied_sites(ZoneKind::Sz);
    plan_moves(
        mz_vacancies,
        &sources,
        &occupancy.layout,
        noise.plan_base_latency_ms,
        noise.plan_per_move_ms,
    )
}

/// Outcome of one executed move.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveResult {
    pub src: Site,
    pub dst: Site,
    pub success: bool,
}

/// Executes a plan against the occupancy. Each move succeeds with
/// probability `1 − p_move_fail`; a failed move loses the atom in transit,
/// leaving both source and destination empty.
pub fn execute_plan(
    occupancy: &mut ZoneOccupancy,
    plan: &MovePlan,
    p_move_fail: f64,
    rng: &mut ShotRng,
) -> Result<Vec<MoveResult>, FillError> {
    let mut results = Vec::with_capacity(plan.moves.len());
    for &(src, dst) in &plan.moves {
        if !occupancy.is_occupied(src) {
            return Err(FillError::EmptySource(src));
        }
        if occupancy.is_occupied(dst) {
            return Err(FillError::OccupiedDestination(dst));
        }
        occupancy.set(src, false);
        let success = !rng.bernoulli(p_move_fail);
        if success {
            occupancy.set(dst, true);
        }
        results.push(MoveResult { src, dst, success });
    }
    Ok(results)
}

// ---------------------------------------------------------------------------
// Replenishment
// ---------------------------------------------------------------------------

/// Stage timing of a replenishment pass plus the register coherence cost.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplenishSequence {
    pub stages: Vec<(String, f64)>,
    pub total_ms: f64,
    /// Z-flip probability applied to each surviving register qubit.
    pub register_dephase_p: f64,
    /// Loss probability for register qubits over the sequence duration.
    pub register_loss_p: f64,
}

/// Report of one replenish invocation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplenishReport {
    pub sequence: ReplenishSequence,
    pub passes: u32,
    pub lz_loaded: usize,
    pub moves_attempted: usize,
    pub moves_succeeded: usize,
    pub sz_filled_after: usize,
    pub fill_fraction: f64,
    /// True when the fill target was not reached with the allowed passes.
    pub partial: bool,
}

/// Target filled fraction of the storage zone after replenishment.
pub const SZ_FILL_TARGET: f64 = 0.9;

/// Maximum LZ load passes per replenish call; a fresh MOT load is retried
/// once if the first pass leaves the SZ under target.
pub const MAX_LZ_LOADS: u32 = 2;

/// Refills the storage zone from the loading zone: LZ sites load with the
/// configured yield (sub-Poissonian 0/1 after light-assisted collisions), an
/// MCM block images LZ and SZ, and single-tweezer moves fill SZ vacancies.
/// Retries with a fresh LZ load if the fill target is missed.
pub fn replenish(
    occupancy: &mut ZoneOccupancy,
    noise: &NoiseModel,
    rng: &mut ShotRng,
) -> ReplenishReport {
    replenish_with_max_loads(occupancy, noise, rng, MAX_LZ_LOADS)
}

/// Replenishment with an explicit LZ-load budget (1 = single pass; the
/// closed-form binomial oracle applies to the single-pass fill statistics).
pub fn replenish_with_max_loads(
    occupancy: &mut ZoneOccupancy,
    noise: &NoiseModel,
    rng: &mut ShotRng,
    max_loads: u32,
) -> ReplenishReport {
    let sz_cap = occupancy.capacity(ZoneKind::Sz) as usize;
    let mut lz_loaded = 0;
    let mut moves_attempted = 0;
    let mut moves_succeeded = 0;
    let mut passes = 0;

    while passes < max_loads.max(1) {
        passes += 1;
        // Fresh LZ load; previous leftovers are discarded with the lattice.
        let lz_cap = occupancy.capacity(ZoneKind::Lz);
        for i in 0..lz_cap {
            let site = Site::new(ZoneKind::Lz, i);
            let mut loaded = rng.bernoulli(noise.lz_yield);
            // The identifying MCM image can lose the fresh atom.
            if loaded {
                let p_img = noise.p_mcm_loss_bright + 2.0 * noise.p_background_loss_per_image;
                if rng.bernoulli(p_img) {
                    loaded = false;
                }
            }
            occupancy.set(site, loaded);
            lz_loaded += loaded as usize;
        }

        let vacancies = occupancy.vacant_sites(ZoneKind::Sz);
        let sources = occupancy.occupied_sites(ZoneKind::Lz);
        let n_moves = vacancies.len().min(sources.len());
        if n_moves > 0 {
            let plan = plan_moves(
                &vacancies[..n_moves],
                &sources,
                &occupancy.layout.clone(),
                noise.plan_base_latency_ms,
                noise.plan_per_move_ms,
            )
            .expect("enough sources by construction");
            let results = execute_plan(occupancy, &plan, noise.p_move_fail, rng)
                .expect("plan consistent with occupancy");
            moves_attempted += results.len();
            moves_succeeded += results.iter().filter(|r| r.success).count();
        }

        if occupancy.count(ZoneKind::Sz) as f64 / sz_cap as f64 > SZ_FILL_TARGET {
            break;
        }
    }

    let stages = vec![
        ("transport".to_string(), noise.replenish_transport_ms),
        ("handoff".to_string(), noise.replenish_handoff_ms),
        ("galvo".to_string(), noise.replenish_galvo_ms),
        ("lac".to_string(), noise.replenish_lac_ms),
        ("mcm_block".to_string(), noise.mcm_block_ms),
        ("rearrange".to_string(), noise.replenish_rearrange_ms),
    ];
    let per_pass_ms: f64 = stages.iter().map(|(_, ms)| ms).sum();
    let total_ms = per_pass_ms * passes as f64;
    let total_s = total_ms / 1000.0;
    // Lumped dephasing: the measured normalized contrast after one sequence,
    // plus the slow idle decay over the wall time.
    let contrast_p = (1.0 - noise.replenish_contrast_site) / 2.0;
    let idle_p = (1.0 - (-noise.idle_dephase_rate * total_s).exp()) / 2.0;
    let register_dephase_p = (contrast_p + idle_p).clamp(0.0, 0.5);
    let register_loss_p = if noise.vacuum_lifetime_s.is_finite() && noise.vacuum_lifetime_s > 0.0
    {
        1.0 - (-total_s / noise.vacuum_lifetime_s).exp()
    } else {
        0.0
    };

    let sz_filled_after = occupancy.count(ZoneKind::Sz);
    let fill_fraction = sz_filled_after as f64 / sz_cap as f64;
    ReplenishReport {
        sequence: ReplenishSequence {
            stages,
            total_ms,
            register_dephase_p,
            register_loss_p,
        },
        passes,
        lz_loaded,
        moves_attempted,
        moves_succeeded,
        sz_filled_after,
        fill_fraction,
        partial: fill_fraction <= SZ_FILL_TARGET,
    }
}

// ---------------------------------------------------------------------------
// Reservoir lifetime
// ---------------------------------------------------------------------------

/// Per-cycle drain profile of a running circuit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DrainProfile {
    /// Atoms measured in the MZ each cycle (each may need replacement).
    pub mz_atoms: usize,
    /// Per-atom, per-cycle probability of loss in the MZ.
    pub p_mz_loss_per_cycle: f64,
    /// Per-atom, per-cycle probability that a stored reservoir atom is lost
    /// (reservoir atoms are imaged every MCM cycle too).
    pub p_sz_loss_per_cycle: f64,
    pub sz_initial: usize,
}

/// Monte-Carlo estimate of cycles until the reservoir cannot cover the MZ
/// losses of a cycle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum LifetimeEstimate {
    /// No loss channels: the reservoir never depletes.
    Unbounded,
    Cycles { mean: f64, ci95: (f64, f64), trials: u32 },
}

pub fn reservoir_lifetime(profile: &DrainProfile, trials: u32, seed: u64) -> LifetimeEstimate {
    if profile.p_mz_loss_per_cycle <= 0.0 && profile.p_sz_loss_per_cycle <= 0.0 {
        return LifetimeEstimate::Unbounded;
    }
    let mut rng = ShotRng::from_seed(seed);
    let mut samples = Vec::with_capacity(trials as usize);
    for _ in 0..trials {
        let mut sz = profile.sz_initial as i64;
        let mut cycles = 0u64;
        loop {
            cycles += 1;
            let mut demand = 0i64;
            for _ in 0..profile.mz_atoms {
                demand += rng.bernoulli(profile.p_mz_loss_per_cycle) as i64;
            }
            let mut stored_lost = 0i64;
            for _ in 0..sz.max(0) {
                stored_lost += rng.bernoulli(profile.p_sz_loss_per_cycle) as i64;
            }
            sz -= stored_lost;
            if demand > sz {
                break;
            }
            sz -= demand;
            if cycles > 10_000_000 {
                break;
            }
        }
        samples.push(cycles as f64);
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    let half = 1.959964 * (var / n).sqrt();
    LifetimeEstimate::Cycles { mean, ci95: (mean - half, mean + half), trials }
}
