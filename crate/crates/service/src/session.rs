//! Session lifecycle, independent of the HTTP layer.
//!
//! Each session owns one [`Simulation`]. Control commands and engine steps
//! take the session lock, so every observer sees whole commands only. A
//! playing session is advanced by a background task that sleeps between
//! events for (event gap / speed) wall-clock seconds.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::{Duration, Instant};

use hcsim_core::engine::LogEntry;
use hcsim_core::workload::load_scenario;
use hcsim_core::{
    render_event_log, render_report, PolicyRegistry, QueueCapacity, ReportKind, Scenario, SimConfig, Simulation,
    StateSnapshot, StepResult,
};
use serde::{Deserialize, Serialize};
use tokio::sync::{broadcast, Notify};

use crate::error::ServiceError;

pub const DEFAULT_IDLE_TIMEOUT: Duration = Duration::from_secs(30 * 60);
const STREAM_CAPACITY: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SessionMode {
    Configuring,
    Running,
    Paused,
    Finished,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    Play,
    Pause,
    Step,
    Reset,
    #[serde(alias = "speed")]
    SetSpeed {
        speed: f64,
    },
    #[serde(alias = "policy")]
    SetPolicy {
        policy: String,
    },
    #[serde(alias = "queue_size")]
    SetQueueSize {
        queue_size: serde_json::Value,
    },
}

/// Scenario files as uploaded, plus run configuration.
#[derive(Debug, Clone, Default, Deserialize)]
pub struct CreateRequest {
    pub eet: String,
    pub machines: String,
    pub workload: String,
    #[serde(default)]
    pub policy: Option<String>,
    #[serde(default)]
    pub queue_size: Option<serde_json::Value>,
    #[serde(default)]
    pub seed: Option<u64>,
}

/// Parses a queue size given as `"inf"`, `"3"`, or `3`.
pub fn parse_queue_size(v: &serde_json::Value) -> Result<QueueCapacity, ServiceError> {
    let text = match v {
        serde_json::Value::String(s) => s.clone(),
        serde_json::Value::Number(n) => n.to_string(),
        other => return Err(ServiceError::BadRequest(format!("invalid queue_size {other}"))),
    };
    text.parse().map_err(ServiceError::from)
}

/// Messages pushed to event-stream subscribers.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum StreamMessage {
    /// One engine event and the resulting counters.
    Applied { entry: LogEntry, clock: hcsim_core::Ticks, counters: hcsim_core::engine::Counters },
    /// Play/pause/finish transitions.
    Mode { mode: SessionMode },
    /// The session restarted or was reconfigured; the snapshot replaces all prior state.
    Reset { snapshot: Box<StateSnapshot> },
}

#[derive(Debug, Clone, Serialize)]
pub struct SessionState {
    pub id: String,
    pub mode: SessionMode,
    pub speed: f64,
    pub policy: String,
    pub queue_size: QueueCapacity,
    pub seed: u64,
    pub snapshot: StateSnapshot,
}

pub struct Session {
    id: String,
    scenario: Scenario,
    config: SimConfig,
    mode: SessionMode,
    speed: f64,
    sim: Simulation,
    /// Bumped whenever a background runner must stop.
    generation: u64,
    last_touched: Instant,
}

impl Session {
    fn state(&self) -> SessionState {
        SessionState {
            id: self.id.clone(),
            mode: self.mode,
            speed: self.speed,
            policy: self.config.policy.to_string(),
            queue_size: self.config.machine_queue_capacity,
            seed: self.config.seed,
            snapshot: self.sim.snapshot(),
        }
    }

    fn untouched(&self) -> bool {
        self.sim.event_log().is_empty()
    }
}

pub struct SessionHandle {
    session: Mutex<Session>,
    stream: broadcast::Sender<StreamMessage>,
    wake: Notify,
}

impl SessionHandle {
    fn lock(&self) -> MutexGuard<'_, Session> {
        self.session.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn publish(&self, msg: StreamMessage) {
        // No subscribers is fine.
        let _ = self.stream.send(msg);
    }

    /// Applies one event. Once the queue drains, the engine is stepped once
    /// more to mark the run finished; that extra call applies nothing.
    fn step_locked(&self, s: &mut Session) -> Result<(), ServiceError> {
        match s.sim.step()? {
            StepResult::Applied(entry) => {
                self.publish(StreamMessage::Applied { entry, clock: s.sim.clock(), counters: s.sim.counters() });
            }
            StepResult::Finished => {}
        }
        if s.sim.next_event_time().is_none() && !s.sim.is_finished() {
            s.sim.step()?;
        }
        if s.sim.is_finished() {
            s.mode = SessionMode::Finished;
            s.generation += 1;
            self.publish(StreamMessage::Mode { mode: SessionMode::Finished });
        }
        Ok(())
    }
}

pub struct SessionManager {
    sessions: Mutex<HashMap<String, Arc<SessionHandle>>>,
    registry: PolicyRegistry,
    next_id: AtomicU64,
    idle_timeout: Duration,
}

impl SessionManager {
    pub fn new(registry: PolicyRegistry, idle_timeout: Duration) -> Self {
        Self { sessions: Mutex::new(HashMap::new()), registry, next_id: AtomicU64::new(1), idle_timeout }
    }

    pub fn registry(&self) -> &PolicyRegistry {
        &self.registry
    }

    fn sessions(&self) -> MutexGuard<'_, HashMap<String, Arc<SessionHandle>>> {
        self.sessions.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn handle(&self, id: &str) -> Result<Arc<SessionHandle>, ServiceError> {
        let handle = self.sessions().get(id).cloned().ok_or_else(|| ServiceError::NotFound(id.to_string()))?;
        handle.lock().last_touched = Instant::now();
        Ok(handle)
    }

    fn build(&self, req: &CreateRequest) -> Result<(Scenario, SimConfig, Simulation), ServiceError> {
        let scenario = load_scenario(&req.eet, &req.machines, &req.workload)?;
        let capacity = match &req.queue_size {
            Some(v) => parse_queue_size(v)?,
            None => QueueCapacity::Unbounded,
        };
        let config = self.registry.config(req.policy.as_deref().unwrap_or("mect"), capacity, req.seed.unwrap_or(0))?;
        let sim = Simulation::new(scenario.clone(), config.clone(), &self.registry)?;
        Ok((scenario, config, sim))
    }

    /// Validates the scenario and opens a paused session at clock 0.
    pub fn create(&self, req: CreateRequest) -> Result<SessionState, ServiceError> {
        let (scenario, config, sim) = self.build(&req)?;
        let id = format!("s{}", self.next_id.fetch_add(1, Ordering::Relaxed));
        let mut session = Session {
            id: id.clone(),
            scenario,
            config,
            mode: SessionMode::Configuring,
            speed: 1.0,
            sim,
            generation: 0,
            last_touched: Instant::now(),
        };
        session.mode = SessionMode::Paused;
        let state = session.state();
        let (stream, _) = broadcast::channel(STREAM_CAPACITY);
        let handle = Arc::new(SessionHandle { session: Mutex::new(session), stream, wake: Notify::new() });
        self.sessions().insert(id, handle);
        Ok(state)
    }

    /// Replaces the scenario files of a session that has not started.
    pub fn replace_scenario(&self, id: &str, mut req: CreateRequest) -> Result<SessionState, ServiceError> {
        let handle = self.handle(id)?;
        let mut s = handle.lock();
        if !s.untouched() || s.mode == SessionMode::Running {
            return Err(ServiceError::Conflict("scenario can only be replaced at clock 0; reset first".into()));
        }
        req.policy.get_or_insert_with(|| s.config.policy.key());
        req.queue_size.get_or_insert_with(|| serde_json::Value::String(s.config.machine_queue_capacity.to_string()));
        req.seed.get_or_insert(s.config.seed);
        let (scenario, config, sim) = self.build(&req)?;
        s.scenario = scenario;
        s.config = config;
        s.sim = sim;
        s.mode = SessionMode::Paused;
        s.generation += 1;
        handle.publish(StreamMessage::Reset { snapshot: Box::new(s.sim.snapshot()) });
        Ok(s.state())
    }

    pub fn state(&self, id: &str) -> Result<SessionState, ServiceError> {
        Ok(self.handle(id)?.lock().state())
    }

    pub fn remove(&self, id: &str) -> Result<(), ServiceError> {
        let handle = self.sessions().remove(id).ok_or_else(|| ServiceError::NotFound(id.to_string()))?;
        handle.lock().generation += 1;
        handle.wake.notify_waiters();
        Ok(())
    }

    pub fn apply_control(self: &Arc<Self>, id: &str, command: Command) -> Result<SessionState, ServiceError> {
        let handle = self.handle(id)?;
        let mut s = handle.lock();
        match command {
            Command::Play => match s.mode {
                SessionMode::Running => {
                    s.mode = SessionMode::Paused;
                    s.generation += 1;
                    handle.publish(StreamMessage::Mode { mode: SessionMode::Paused });
                }
                SessionMode::Paused | SessionMode::Configuring => {
                    s.mode = SessionMode::Running;
                    s.generation += 1;
                    handle.publish(StreamMessage::Mode { mode: SessionMode::Running });
                    tokio::spawn(run_loop(Arc::clone(&handle), s.generation));
                }
                SessionMode::Finished => {
                    return Err(ServiceError::Conflict("simulation finished; reset to play again".into()))
                }
            },
            Command::Pause => match s.mode {
                SessionMode::Running => {
                    s.mode = SessionMode::Paused;
                    s.generation += 1;
                    handle.publish(StreamMessage::Mode { mode: SessionMode::Paused });
                }
                SessionMode::Paused | SessionMode::Configuring => {}
                SessionMode::Finished => return Err(ServiceError::Conflict("simulation finished".into())),
            },
            Command::Step => match s.mode {
                SessionMode::Paused | SessionMode::Configuring => handle.step_locked(&mut s)?,
                SessionMode::Running => {
                    return Err(ServiceError::Conflict("cannot step while running; pause first".into()))
                }
                SessionMode::Finished => return Err(ServiceError::Conflict("simulation finished".into())),
            },
            Command::Reset => {
                s.sim = Simulation::new(s.scenario.clone(), s.config.clone(), &self.registry)?;
                s.mode = SessionMode::Paused;
                s.generation += 1;
                handle.publish(StreamMessage::Reset { snapshot: Box::new(s.sim.snapshot()) });
            }
            Command::SetSpeed { speed } => {
                if !(speed.is_finite() && speed > 0.0) {
                    return Err(ServiceError::BadRequest(format!("speed must be positive, got {speed}")));
                }
                s.speed = speed;
            }
            Command::SetPolicy { policy } => {
                self.require_fresh(&s)?;
                let id = self.registry.resolve(&policy)?;
                let capacity = match self.registry.mode_of(&id)? {
                    hcsim_core::Mode::Immediate => QueueCapacity::Unbounded,
                    hcsim_core::Mode::Batch => s.config.machine_queue_capacity,
                };
                self.reconfigure(&handle, &mut s, &policy, capacity)?;
            }
            Command::SetQueueSize { queue_size } => {
                self.require_fresh(&s)?;
                let capacity = parse_queue_size(&queue_size)?;
                let policy = s.config.policy.key();
                self.reconfigure(&handle, &mut s, &policy, capacity)?;
            }
        }
        handle.wake.notify_waiters();
        Ok(s.state())
    }

    fn require_fresh(&self, s: &Session) -> Result<(), ServiceError> {
        if s.untouched() && s.mode != SessionMode::Running {
            Ok(())
        } else {
            Err(ServiceError::Conflict("policy and queue size can only change at clock 0; reset first".into()))
        }
    }

    fn reconfigure(
        &self,
        handle: &SessionHandle,
        s: &mut Session,
        policy: &str,
        capacity: QueueCapacity,
    ) -> Result<(), ServiceError> {
        let config = self.registry.config(policy, capacity, s.config.seed)?;
        s.sim = Simulation::new(s.scenario.clone(), config.clone(), &self.registry)?;
        s.config = config;
        handle.publish(StreamMessage::Reset { snapshot: Box::new(s.sim.snapshot()) });
        Ok(())
    }

    /// CSV report of a finished session.
    pub fn report(&self, id: &str, kind: ReportKind) -> Result<String, ServiceError> {
        let handle = self.handle(id)?;
        let s = handle.lock();
        if s.mode != SessionMode::Finished {
            return Err(ServiceError::Conflict("simulation not finished".into()));
        }
        Ok(render_report(&s.sim.clone().into_outcome(), kind))
    }

    /// Applied events so far, as CSV.
    pub fn event_log(&self, id: &str) -> Result<String, ServiceError> {
        Ok(render_event_log(self.handle(id)?.lock().sim.event_log()))
    }

    /// Current snapshot plus a receiver positioned right after it.
    pub fn subscribe(&self, id: &str) -> Result<(SessionState, broadcast::Receiver<StreamMessage>), ServiceError> {
        let handle = self.handle(id)?;
        let s = handle.lock();
        let rx = handle.stream.subscribe();
        Ok((s.state(), rx))
    }

    /// Drops sessions untouched for longer than the idle timeout. Running
    /// sessions are kept.
    pub fn evict_idle(&self) -> usize {
        let mut sessions = self.sessions();
        let before = sessions.len();
        sessions.retain(|_, h| {
            let s = h.lock();
            s.mode == SessionMode::Running || s.last_touched.elapsed() < self.idle_timeout
        });
        before - sessions.len()
    }

    pub fn idle_timeout(&self) -> Duration {
        self.idle_timeout
    }

    pub fn len(&self) -> usize {
        self.sessions().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

async fn run_loop(handle: Arc<SessionHandle>, generation: u64) {
    loop {
        // Armed before reading state so a pause or speed change cannot slip
        // between the read and the sleep.
        let notified = handle.wake.notified();
        tokio::pin!(notified);
        notified.as_mut().enable();
        let delay = {
            let mut s = handle.lock();
            if s.mode != SessionMode::Running || s.generation != generation {
                return;
            }
            match s.sim.next_event_time() {
                Some(t) => (t - s.sim.clock()).as_secs_f64() / s.speed,
                None => {
                    let _ = handle.step_locked(&mut s);
                    return;
                }
            }
        };
        if delay > 0.0 {
            let sleep = async {
                match Duration::try_from_secs_f64(delay) {
                    Ok(d) => tokio::time::sleep(d).await,
                    Err(_) => std::future::pending().await,
                }
            };
            tokio::select! {
                _ = sleep => {}
                _ = notified => continue,
            }
        } else {
            tokio::task::yield_now().await;
        }
        let mut s = handle.lock();
        if s.mode != SessionMode::Running || s.generation != generation {
            return;
        }
        if handle.step_locked(&mut s).is_err() {
            s.mode = SessionMode::Paused;
            return;
        }
    }
}
