//! Episode driver: samples levels, steps the world and scores transitions.

use serde::Serialize;
use thiserror::Error;

use crate::compiler::validate_blueprint;
use crate::observe::{observe, ObsError, Observation};
use crate::reward::{CustomReward, RewardError, RewardManager};
use crate::rng::GameRng;
use crate::tasks::{make_task, EnvSpec, Overrides, TaskError};
use crate::world::{Action, EngineError, Event, Termination, World};

/// Levels drawn per reset before giving up.
pub const RESET_ATTEMPTS: u64 = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvError {
    #[error("reset must be called first")]
    NotReset,
    #[error("the episode is over; call reset")]
    EpisodeDone,
    #[error("action `{0}` is not in this task's action set")]
    IllegalAction(String),
    #[error("action index {index} is out of range (0..{len})")]
    ActionIndex { index: usize, len: usize },
    #[error("no valid level after {attempts} attempts: {last}")]
    Level { attempts: u64, last: String },
    #[error(transparent)]
    Task(#[from] TaskError),
    #[error(transparent)]
    Reward(#[from] RewardError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Observe(#[from] ObsError),
}

/// Why an episode stopped.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EndReason {
    Goal,
    Died { cause: String },
    FellThrough,
    Timeout,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepInfo {
    pub events: Vec<Event>,
    pub time_advanced: bool,
    pub steps: u64,
    pub end: Option<EndReason>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Transition {
    pub obs: Observation,
    pub reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

fn mix(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One environment instance.
#[derive(Debug)]
pub struct Env {
    spec: EnvSpec,
    rewards: RewardManager,
    keys: Vec<&'static str>,
    world: Option<World>,
    last_obs: Option<Observation>,
    steps: u64,
    over: bool,
    level_seed: u64,
}

impl Env {
    pub fn new(spec: EnvSpec) -> Result<Env, EnvError> {
        spec.reward.validate()?;
        let keys = spec
            .obs_keys
            .iter()
            .map(|k| {
                crate::observe::KEYS
                    .iter()
                    .copied()
                    .find(|c| c == k)
                    .ok_or_else(|| ObsError::UnknownKey(k.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Env {
            rewards: RewardManager::new(spec.reward.clone()),
            spec,
            keys,
            world: None,
            last_obs: None,
            steps: 0,
            over: false,
            level_seed: 0,
        })
    }

    /// Looks up a registered task by id.
    pub fn make(id: &str, overrides: &Overrides) -> Result<Env, EnvError> {
        Env::new(make_task(id, overrides)?)
    }

    pub fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    pub fn actions(&self) -> &[Action] {
        &self.spec.actions
    }

    pub fn world(&self) -> Option<&World> {
        self.world.as_ref()
    }

    pub fn rewards_mut(&mut self) -> &mut RewardManager {
        &mut self.rewards
    }

    pub fn add_custom_reward(&mut self, hook: CustomReward) {
        self.rewards.add_custom(hook);
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Seed of the level actually built by the last reset.
    pub fn level_seed(&self) -> u64 {
        self.level_seed
    }

    pub fn is_done(&self) -> bool {
        self.over
    }

    /// Starts a new episode. Levels failing the task's requirements are
    /// redrawn with derived seeds.
    pub fn reset(&mut self, seed: u64) -> Result<Observation, EnvError> {
        let mut last = String::from("no attempt made");
        for attempt in 0..RESET_ATTEMPTS {
            let level_seed = if attempt == 0 { seed } else { mix(seed, attempt) };
            let bp = match self.spec.source.blueprint(level_seed) {
                Ok(bp) => bp,
                Err(e) => {
                    last = e;
                    continue;
                }
            };
            if let Some(issue) = validate_blueprint(&bp, &self.spec.requirements).into_iter().next() {
                last = issue.to_string();
                continue;
            }
            let mut world = match World::from_blueprint(&bp, mix(level_seed, u64::MAX)) {
                Ok(w) => w,
                Err(e) => {
                    last = e.to_string();
                    continue;
                }
            };
            world.style = self.spec.prompt_style;
            for name in &self.spec.starting_inventory {
                world.give(name)?;
            }
            if self.spec.mapped {
                world.reveal_map();
            }
            let obs = observe(&world, &self.keys, self.spec.crop)?;
            self.world = Some(world);
            self.last_obs = Some(obs.clone());
            self.rewards.reset();
            self.steps = 0;
            self.over = false;
            self.level_seed = level_seed;
            return Ok(obs);
        }
        Err(EnvError::Level {
            attempts: RESET_ATTEMPTS,
            last,
        })
    }

    /// Steps with the action at `index` in the action set.
    pub fn step_index(&mut self, index: usize) -> Result<Transition, EnvError> {
        let len = self.spec.actions.len();
        let action = *self.spec.actions.get(index).ok_or(EnvError::ActionIndex { index, len })?;
        self.step(action)
    }

    pub fn step(&mut self, action: Action) -> Result<Transition, EnvError> {
        if !self.spec.actions.contains(&action) {
            return Err(EnvError::IllegalAction(action.name()));
        }
        let world = self.world.as_mut().ok_or(EnvError::NotReset)?;
        if self.over {
            return Err(EnvError::EpisodeDone);
        }
        let out = world.step(action)?;
        self.steps += 1;
        let ended = world.done.is_some();
        let scored = self
            .rewards
            .evaluate(&out.events, out.time_advanced, ended, self.steps, self.spec.max_steps);
        let obs = observe(world, &self.keys, self.spec.crop)?;
        let mut reward = scored.reward;
        if self.rewards.has_custom() {
            if let Some(prev) = &self.last_obs {
                reward += self.rewards.custom_reward(prev, action, &obs);
            }
        }
        let end = if !scored.done {
            None
        } else if scored.goal {
            Some(EndReason::Goal)
        } else {
            match &world.done {
                Some(Termination::Died { cause }) => Some(EndReason::Died { cause: cause.clone() }),
                Some(Termination::FellThrough) => Some(EndReason::FellThrough),
                None => Some(EndReason::Timeout),
            }
        };
        self.over = scored.done;
        self.last_obs = Some(obs.clone());
        Ok(Transition {
            obs,
            reward,
            done: scored.done,
            info: StepInfo {
                events: out.events,
                time_advanced: out.time_advanced,
                steps: self.steps,
                end,
            },
        })
    }
}

/// Summary of one finished episode.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Episode {
    pub seed: u64,
    pub steps: u64,
    pub total_reward: f64,
    pub end: Option<EndReason>,
    pub final_hash: String,
}

/// Plays one episode, asking `policy` for an action index each step.
pub fn rollout(
    env: &mut Env,
    seed: u64,
    mut policy: impl FnMut(&Observation, usize) -> usize,
) -> Result<Episode, EnvError> {
    let mut obs = env.reset(seed)?;
    let n = env.actions().len();
    let mut total = 0.0;
    loop {
        let t = env.step_index(policy(&obs, n))?;
        total += t.reward;
        obs = t.obs;
        if t.done {
            return Ok(Episode {
                seed,
                steps: env.steps(),
                total_reward: total,
                end: t.info.end,
                final_hash: obs.hash(),
            });
        }
    }
}

/// Uniform random policy driven by its own seeded generator.
pub fn random_policy(seed: u64) -> impl FnMut(&Observation, usize) -> usize {
    let mut rng = GameRng::new(mix(seed, 0x5EED));
    move |_, n| rng.below(n)
}
