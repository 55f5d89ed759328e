//! The generic-sequence builder: a resumable state machine whose stages
//! are nested coordinate segments `Y_0 ⊆ Y_1 ⊆ …` and whose task log
//! records how each scheduled arrow out of a stage was absorbed.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::enumerate::{enumerate_arrows, enumerate_objects, Budget, EnumeratedArrow};
use crate::amalgam::amalgamate;
use crate::error::{Error, Result};
use crate::exactgeom::{RatMat, SymPolytope};
use crate::maps::{InitialArrow, LinMap, ProjectionChain};
use crate::spaces::MonotoneSpace;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FraisseConfig {
    pub seed: u64,
    /// Hard cap on every ambient dimension.
    pub max_dim: usize,
    /// Base of the denominator schedule `denom0 · 2^step`.
    pub denom0: u64,
    pub budget: Budget,
}

impl FraisseConfig {
    pub fn new(seed: u64) -> Self {
        FraisseConfig {
            seed,
            max_dim: crate::exactgeom::DEFAULT_DIM_CAP,
            denom0: 4,
            budget: Budget { max_dim: 2, max_denominator: 2, max_generators: 2 },
        }
    }

    /// Scheduled stages stay within half the cap, so that embeddings and
    /// back-and-forth can still amalgamate two stages.
    pub fn stage_limit(&self) -> usize {
        self.max_dim / 2
    }

    /// Denominator bound at a given step.
    pub fn denominator_bound(&self, step: usize) -> BigInt {
        BigInt::from(self.denom0) << step
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TaskOrigin {
    /// Position in the Cantor dovetail and index in the stage's shuffled
    /// arrow list.
    Scheduled { position: u64, arrow: usize },
    /// Added by an embedding or back-and-forth step.
    External,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TaskStatus {
    Pending,
    Satisfied { m: usize, g: RatMat, chain: ProjectionChain },
    Deferred(String),
}

/// An arrow `f: Y_n → Z` and how it was absorbed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArrowTask {
    pub n: usize,
    pub origin: TaskOrigin,
    pub z: SymPolytope,
    pub f: RatMat,
    pub f_chain: ProjectionChain,
    pub status: TaskStatus,
}

#[derive(Default)]
struct ArrowCache {
    objects: Option<Arc<Vec<MonotoneSpace>>>,
    arrows: BTreeMap<usize, Arc<Vec<EnumeratedArrow>>>,
}

impl Clone for ArrowCache {
    fn clone(&self) -> Self {
        ArrowCache { objects: self.objects.clone(), arrows: self.arrows.clone() }
    }
}

#[derive(Clone)]
pub struct FraisseState {
    pub config: FraisseConfig,
    pub stages: Vec<MonotoneSpace>,
    pub tasks: Vec<ArrowTask>,
    /// Next dovetail position.
    pub cursor: u64,
    /// Number of processed scheduled tasks.
    pub steps: usize,
    cache: ArrowCache,
}

impl fmt::Debug for FraisseState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FraisseState")
            .field("config", &self.config)
            .field("dims", &self.stages.iter().map(|s| s.dim()).collect::<Vec<_>>())
            .field("tasks", &self.tasks.len())
            .field("cursor", &self.cursor)
            .field("steps", &self.steps)
            .finish()
    }
}

impl PartialEq for FraisseState {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config
            && self.stages == other.stages
            && self.tasks == other.tasks
            && self.cursor == other.cursor
            && self.steps == other.steps
    }
}

impl Eq for FraisseState {}

/// Inverse of the Cantor pairing `π(a, b) = (a+b)(a+b+1)/2 + b`.
pub fn cantor_unpair(p: u64) -> (u64, u64) {
    let mut w = (((8.0 * p as f64 + 1.0).sqrt() - 1.0) / 2.0) as u64;
    while w * (w + 1) / 2 > p {
        w -= 1;
    }
    while (w + 1) * (w + 2) / 2 <= p {
        w += 1;
    }
    let b = p - w * (w + 1) / 2;
    (w - b, b)
}

pub fn cantor_pair(a: u64, b: u64) -> u64 {
    (a + b) * (a + b + 1) / 2 + b
}

impl FraisseState {
    /// `Y_0 = {0}` and an empty log.
    pub fn new(config: FraisseConfig) -> Self {
        FraisseState {
            config,
            stages: vec![MonotoneSpace::trivial()],
            tasks: Vec::new(),
            cursor: 0,
            steps: 0,
            cache: ArrowCache::default(),
        }
    }

    /// Reassembles a state read from storage.
    pub fn from_parts(
        config: FraisseConfig,
        stages: Vec<MonotoneSpace>,
        tasks: Vec<ArrowTask>,
        cursor: u64,
        steps: usize,
    ) -> Self {
        FraisseState { config, stages, tasks, cursor, steps, cache: ArrowCache::default() }
    }

    pub fn top(&self) -> usize {
        self.stages.len() - 1
    }

    pub fn stage(&self, n: usize) -> Result<&MonotoneSpace> {
        self.stages
            .get(n)
            .ok_or(Error::IndexOutOfRange { index: n, max: self.stages.len().saturating_sub(1) })
    }

    /// Coordinate inclusion `Y_n → Y_m`.
    pub fn inclusion(&self, n: usize, m: usize) -> Result<LinMap> {
        LinMap::inclusion(self.stage(n)?.ball(), self.stage(m)?.ball())
    }

    fn objects(&mut self) -> Arc<Vec<MonotoneSpace>> {
        if self.cache.objects.is_none() {
            self.cache.objects = Some(Arc::new(enumerate_objects(&self.config.budget)));
        }
        self.cache.objects.clone().expect("filled")
    }

    /// Arrows out of stage `n`, shuffled by a generator seeded from
    /// `(seed, n)`.
    pub fn arrows_for(&mut self, n: usize) -> Arc<Vec<EnumeratedArrow>> {
        if let Some(a) = self.cache.arrows.get(&n) {
            return a.clone();
        }
        let objects = self.objects();
        let mut list = enumerate_arrows(&self.stages[n], &objects, &self.config.budget);
        let mixed = self.config.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (n as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(mixed);
        list.shuffle(&mut rng);
        let list = Arc::new(list);
        self.cache.arrows.insert(n, list.clone());
        list
    }

    /// Absorbs an initial arrow `f: Y_n → Z`: amalgamates the top stage
    /// with `Z` over `Y_n`, appends the result as a new stage `Y_m`, and
    /// returns `m` with `g: Z → Y_m` such that `g∘f` is the inclusion.
    pub fn absorb(&mut self, n: usize, f: &InitialArrow, dim_limit: usize) -> Result<(usize, InitialArrow)> {
        let yn = self.stage(n)?.clone();
        if f.map.domain() != yn.ball() {
            return Err(Error::DimensionMismatch { expected: yn.dim(), found: f.map.domain().dim() });
        }
        let top = self.stages[self.top()].clone();
        let zdim = f.map.codomain().dim();
        let new_dim = top.dim() + zdim - yn.dim();
        if new_dim > dim_limit {
            return Err(Error::DimensionCapExceeded { dim: new_dim, cap: dim_limit });
        }
        let basis = f.normalizing_basis()?;
        let binv = basis.inverse().ok_or(Error::RankDeficient)?;
        let z_norm = MonotoneSpace::rebased(f.map.codomain(), &basis)?;
        let p = amalgamate(yn.dim(), &top, &z_norm)?;
        let gmap = LinMap::new(f.map.codomain().clone(), p.w.ball().clone(), p.jy.matrix().mul(&binv)?)?;
        let g = InitialArrow::certify(gmap, p.chain_y.clone())?;
        if g.map.matrix().mul(f.map.matrix())? != RatMat::inclusion(p.w.dim(), yn.dim()) {
            return Err(Error::Certificate("g∘f is not the stage inclusion".into()));
        }
        self.stages.push(p.w);
        Ok((self.top(), g))
    }

    fn denominators_ok(&self, ball: &SymPolytope) -> bool {
        let bound = self.config.denominator_bound(self.steps);
        ball.vertices()
            .iter()
            .chain(ball.functionals())
            .flatten()
            .all(|c| c.denom() <= &bound)
    }

    /// Upper bound on useful dovetail positions given the current stages.
    fn position_horizon(&mut self) -> u64 {
        let mut widest = 0;
        for n in 0..self.stages.len() {
            widest = widest.max(self.arrows_for(n).len());
        }
        let s = (self.stages.len() + widest) as u64;
        cantor_pair(s, s)
    }

    /// Processes the next scheduled task.
    pub fn step(&mut self) -> Result<()> {
        loop {
            let position = self.cursor;
            if position > self.position_horizon() {
                return Err(Error::StateExhausted("every scheduled task within the budget has been processed".into()));
            }
            self.cursor += 1;
            let (n, i) = cantor_unpair(position);
            let (n, i) = (n as usize, i as usize);
            if n >= self.stages.len() {
                continue;
            }
            let arrows = self.arrows_for(n);
            let Some(arrow) = arrows.get(i) else { continue };
            self.process(position, n, i, arrow);
            self.steps += 1;
            return Ok(());
        }
    }

    fn process(&mut self, position: u64, n: usize, i: usize, arrow: &EnumeratedArrow) {
        let chain = ProjectionChain::truncations(arrow.map.codomain().dim(), self.stages[n].dim());
        let mut task = ArrowTask {
            n,
            origin: TaskOrigin::Scheduled { position, arrow: i },
            z: arrow.map.codomain().clone(),
            f: arrow.map.matrix().clone(),
            f_chain: chain.clone(),
            status: TaskStatus::Pending,
        };
        let limit = self.config.stage_limit();
        let outcome = InitialArrow::certify(arrow.map.clone(), chain).and_then(|f| {
            let saved = self.stages.len();
            let r = self.absorb(n, &f, limit)?;
            if !self.denominators_ok(self.stages[r.0].ball()) {
                self.stages.truncate(saved);
                return Err(Error::BudgetInfeasible("stage exceeds the denominator schedule".into()));
            }
            Ok(r)
        });
        task.status = match outcome {
            Ok((m, g)) => TaskStatus::Satisfied { m, g: g.map.matrix().clone(), chain: g.chain },
            Err(e) => TaskStatus::Deferred(format!("{}: {}", e.name(), e)),
        };
        self.tasks.push(task);
    }

    /// Runs `count` more scheduled steps.
    pub fn run(&mut self, count: usize) -> Result<()> {
        for _ in 0..count {
            self.step()?;
        }
        Ok(())
    }

    /// Logs an externally absorbed arrow.
    pub fn record_external(&mut self, n: usize, f: &InitialArrow, m: usize, g: &InitialArrow) {
        self.tasks.push(ArrowTask {
            n,
            origin: TaskOrigin::External,
            z: f.map.codomain().clone(),
            f: f.map.matrix().clone(),
            f_chain: f.chain.clone(),
            status: TaskStatus::Satisfied { m, g: g.map.matrix().clone(), chain: g.chain.clone() },
        });
    }

    /// Absorbs an external arrow at the full dimension cap and logs it.
    pub fn extend(&mut self, n: usize, f: &InitialArrow) -> Result<(usize, InitialArrow)> {
        let (m, g) = self.absorb(n, f, self.config.max_dim)?;
        self.record_external(n, f, m, &g);
        Ok((m, g))
    }

    pub fn satisfied_tasks(&self) -> impl Iterator<Item = (usize, &ArrowTask)> {
        self.tasks
            .iter()
            .enumerate()
            .filter(|(_, t)| matches!(t.status, TaskStatus::Satisfied { .. }))
    }
}

/// Fresh state after `steps` scheduled steps.
pub fn build_generic(config: FraisseConfig, steps: usize) -> Result<FraisseState> {
    if steps == 0 {
        return Err(Error::InvalidParameter("steps must be at least 1".into()));
    }
    let mut state = FraisseState::new(config);
    state.run(steps)?;
    Ok(state)
}

/// Re-verifies condition (A) for one logged task: `f` and `g` are
/// certified initial isometric embeddings and `g∘f` is the inclusion
/// `Y_n → Y_m`, exactly.
pub fn check_condition_a(state: &FraisseState, task: &ArrowTask) -> Result<()> {
    let TaskStatus::Satisfied { m, g, chain } = &task.status else {
        return Err(Error::NotSatisfied);
    };
    let (n, m) = (task.n, *m);
    if m <= n {
        return Err(Error::ConditionA(format!("m = {m} is not beyond n = {n}")));
    }
    let yn = state.stage(n)?;
    let ym = state.stage(m)?;
    let f = LinMap::new(yn.ball().clone(), task.z.clone(), task.f.clone())
        .and_then(|map| InitialArrow::certify(map, task.f_chain.clone()))
        .map_err(|e| Error::ConditionA(format!("f is not a certified arrow: {e}")))?;
    let g = LinMap::new(task.z.clone(), ym.ball().clone(), g.clone())
        .and_then(|map| InitialArrow::certify(map, chain.clone()))
        .map_err(|e| Error::ConditionA(format!("g is not a certified arrow: {e}")))?;
    if g.map.matrix().mul(f.map.matrix())? != RatMat::inclusion(ym.dim(), yn.dim()) {
        return Err(Error::ConditionA("g∘f differs from the inclusion Y_n → Y_m".into()));
    }
    if ym.truncate(yn.dim())? != *yn {
        return Err(Error::ConditionA("Y_n is not the initial segment of Y_m".into()));
    }
    Ok(())
}

/// Checks the stage chain and every satisfied task.
pub fn verify_state(state: &FraisseState) -> Result<()> {
    if state.stages.first().map(|s| s.dim()) != Some(0) {
        return Err(Error::Certificate("Y_0 must be the trivial space".into()));
    }
    for w in state.stages.windows(2) {
        if w[1].dim() < w[0].dim() || w[1].truncate(w[0].dim())? != w[0] {
            return Err(Error::Certificate("stages are not nested initial segments".into()));
        }
    }
    for (idx, task) in state.satisfied_tasks() {
        check_condition_a(state, task).map_err(|e| Error::ConditionA(format!("task {idx}: {e}")))?;
    }
    Ok(())
}
