use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;
use uuid::Uuid;

use crate::event::{EventKind, EventRecord};
use crate::window::CollectionWindow;

/// A survey not completed within this many seconds of trigger expires.
pub const SURVEY_EXPIRY_SECONDS: f64 = 1800.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurveyKind {
    Random,
    Activity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurveyStatus {
    Pending,
    Completed,
    Declined,
    Expired,
}

impl SurveyStatus {
    pub fn is_terminal(&self) -> bool {
        !matches!(self, SurveyStatus::Pending)
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SurveyInstance {
    pub id: Uuid,
    pub kind: SurveyKind,
    pub triggered_t: f64,
    pub expires_t: f64,
    pub status: SurveyStatus,
    /// Present exactly when the instance completed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub responses: Option<BTreeMap<String, serde_json::Value>>,
}

/// Participant or clock input resolving a pending survey.
#[derive(Debug, Clone)]
pub enum SurveyAction {
    Complete {
        at: f64,
        responses: BTreeMap<String, serde_json::Value>,
    },
    Decline {
        at: f64,
    },
    /// Clock advance; expires the instance when `at` passes its deadline.
    Clock {
        at: f64,
    },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SchedulerCounters {
    /// MVPA notifications ignored because they fell outside the window.
    pub suppressed_outside_window: u64,
    /// MVPA notifications ignored because an activity survey was pending.
    pub suppressed_already_pending: u64,
    /// Random slots whose delivery was missed by a whole expiry period.
    pub skipped_slots: u64,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EmaError {
    #[error("unknown survey instance {0}")]
    UnknownSurvey(Uuid),
    #[error("survey already resolved as {0:?}")]
    AlreadyTerminal(SurveyStatus),
    #[error("invalid collection window: {0}")]
    BadWindow(String),
}

/// Plans the three random-survey times for one day: one uniform draw per
/// block. With the standard window the blocks are morning 07:30–12:00,
/// afternoon 12:00–17:00, and evening 17:00–21:30; a nonstandard window is
/// split into equal thirds. Returned times are seconds since local midnight,
/// deterministic in `(day_index, seed)`.
pub fn plan_random_surveys(
    day_index: u32,
    seed: u64,
    window: &CollectionWindow,
) -> Result<[f64; 3], EmaError> {
    window.validate().map_err(EmaError::BadWindow)?;
    let noon = 12 * 3600;
    let five_pm = 17 * 3600;
    let blocks: [(u32, u32); 3] = if window.start_s < noon && five_pm < window.end_s {
        [
            (window.start_s, noon),
            (noon, five_pm),
            (five_pm, window.end_s),
        ]
    } else {
        let third = window.len_seconds() / 3;
        [
            (window.start_s, window.start_s + third),
            (window.start_s + third, window.start_s + 2 * third),
            (window.start_s + 2 * third, window.end_s),
        ]
    };
    let mixed = seed ^ (day_index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    let mut rng = ChaCha8Rng::seed_from_u64(mixed);
    let mut times = [0.0; 3];
    for (i, (lo, hi)) in blocks.iter().enumerate() {
        times[i] = rng.random_range(*lo as f64..*hi as f64);
    }
    Ok(times)
}

#[derive(Debug, Clone)]
struct Slot {
    t: f64,
    fired: bool,
}

/// Per-participant survey scheduler, driven entirely by explicit times.
#[derive(Debug, Clone)]
pub struct EmaScheduler {
    window: CollectionWindow,
    participant_id: String,
    phone_id: String,
    id_rng: ChaCha8Rng,
    day_start_t: f64,
    slots: Vec<Slot>,
    instances: Vec<SurveyInstance>,
    counters: SchedulerCounters,
}

impl EmaScheduler {
    pub fn new(
        participant_id: &str,
        phone_id: &str,
        window: CollectionWindow,
        id_seed: u64,
    ) -> Result<Self, EmaError> {
        window.validate().map_err(EmaError::BadWindow)?;
        Ok(Self {
            window,
            participant_id: participant_id.to_string(),
            phone_id: phone_id.to_string(),
            id_rng: ChaCha8Rng::seed_from_u64(id_seed),
            day_start_t: 0.0,
            slots: Vec::new(),
            instances: Vec::new(),
            counters: SchedulerCounters::default(),
        })
    }

    pub fn window(&self) -> &CollectionWindow {
        &self.window
    }

    pub fn counters(&self) -> SchedulerCounters {
        self.counters
    }

    pub fn instances(&self) -> &[SurveyInstance] {
        &self.instances
    }

    pub fn survey(&self, id: Uuid) -> Option<&SurveyInstance> {
        self.instances.iter().find(|s| s.id == id)
    }

    pub fn pending(&self) -> impl Iterator<Item = &SurveyInstance> {
        self.instances
            .iter()
            .filter(|s| s.status == SurveyStatus::Pending)
    }

    /// Installs the day's random slots. Returns the absolute trigger times.
    pub fn begin_day(
        &mut self,
        day_start_t: f64,
        day_index: u32,
        plan_seed: u64,
    ) -> Result<[f64; 3], EmaError> {
        let day_times = plan_random_surveys(day_index, plan_seed, &self.window)?;
        self.day_start_t = day_start_t;
        self.slots = day_times
            .iter()
            .map(|t| Slot {
                t: day_start_t + t,
                fired: false,
            })
            .collect();
        Ok([
            day_start_t + day_times[0],
            day_start_t + day_times[1],
            day_start_t + day_times[2],
        ])
    }

    fn next_id(&mut self) -> Uuid {
        let mut bytes = [0u8; 16];
        self.id_rng.fill(&mut bytes);
        uuid::Builder::from_random_bytes(bytes).into_uuid()
    }

    fn trigger(&mut self, kind: SurveyKind, triggered_t: f64) -> (Uuid, Vec<EventRecord>) {
        let id = self.next_id();
        self.instances.push(SurveyInstance {
            id,
            kind,
            triggered_t,
            expires_t: triggered_t + SURVEY_EXPIRY_SECONDS,
            status: SurveyStatus::Pending,
            responses: None,
        });
        let events = vec![
            self.event(EventKind::SurveyTriggered, triggered_t),
            self.event(EventKind::SurveyNotified, triggered_t),
        ];
        (id, events)
    }

    fn event(&self, kind: EventKind, t: f64) -> EventRecord {
        EventRecord::new(kind, &self.participant_id, &self.phone_id, t, None)
    }

    /// Advances the scheduler clock: fires due random slots and expires
    /// overdue pending instances. A slot whose delivery was missed by a
    /// whole expiry period is recorded as triggered-then-expired rather
    /// than delivered late.
    pub fn tick(&mut self, now: f64) -> Vec<EventRecord> {
        let mut events = Vec::new();
        for i in 0..self.slots.len() {
            if self.slots[i].fired || self.slots[i].t > now {
                continue;
            }
            self.slots[i].fired = true;
            let slot_t = self.slots[i].t;
            if now - slot_t >= SURVEY_EXPIRY_SECONDS {
                // Delivery missed by a whole expiry period (phone downtime):
                // the slot is recorded as triggered and expired, but no
                // notification ever reached the participant.
                self.counters.skipped_slots += 1;
                let id = self.next_id();
                self.instances.push(SurveyInstance {
                    id,
                    kind: SurveyKind::Random,
                    triggered_t: slot_t,
                    expires_t: slot_t + SURVEY_EXPIRY_SECONDS,
                    status: SurveyStatus::Expired,
                    responses: None,
                });
                events.push(self.event(EventKind::SurveyTriggered, slot_t));
                events.push(self.event(EventKind::SurveyExpired, slot_t + SURVEY_EXPIRY_SECONDS));
            } else {
                let (_, mut evs) = self.trigger(SurveyKind::Random, now.max(slot_t));
                events.append(&mut evs);
            }
        }
        // Expire overdue instances.
        let mut expired = Vec::new();
        for inst in &mut self.instances {
            if inst.status == SurveyStatus::Pending && now >= inst.expires_t {
                inst.status = SurveyStatus::Expired;
                expired.push(inst.expires_t);
            }
        }
        for t in expired {
            events.push(self.event(EventKind::SurveyExpired, t));
        }
        events
    }

    /// Handles an MVPA epoch notification. Inside the window and with no
    /// activity survey already pending, a new pending activity survey is
    /// created; otherwise the notification is suppressed and counted.
    pub fn on_mvpa_notification(&mut self, now: f64) -> (Option<Uuid>, Vec<EventRecord>) {
        let day_second = now - self.day_start_t;
        if !self.window.contains_day_second(day_second) {
            self.counters.suppressed_outside_window += 1;
            return (None, Vec::new());
        }
        let activity_pending = self
            .instances
            .iter()
            .any(|s| s.kind == SurveyKind::Activity && s.status == SurveyStatus::Pending);
        if activity_pending {
            self.counters.suppressed_already_pending += 1;
            return (None, Vec::new());
        }
        let (id, events) = self.trigger(SurveyKind::Activity, now);
        (Some(id), events)
    }

    /// Applies a participant action or clock advance to a pending instance.
    /// Completion or decline after the deadline resolves as expiry.
    pub fn resolve(
        &mut self,
        id: Uuid,
        action: SurveyAction,
    ) -> Result<(SurveyStatus, Vec<EventRecord>), EmaError> {
        let idx = self
            .instances
            .iter()
            .position(|s| s.id == id)
            .ok_or(EmaError::UnknownSurvey(id))?;
        if self.instances[idx].status.is_terminal() {
            return Err(EmaError::AlreadyTerminal(self.instances[idx].status));
        }
        let expires_t = self.instances[idx].expires_t;
        let (status, event) = match action {
            SurveyAction::Complete { at, responses } if at < expires_t => {
                self.instances[idx].responses = Some(responses);
                (
                    SurveyStatus::Completed,
                    Some(self.event(EventKind::SurveyCompleted, at)),
                )
            }
            SurveyAction::Decline { at } if at < expires_t => (
                SurveyStatus::Declined,
                Some(self.event(EventKind::SurveyDeclined, at)),
            ),
            SurveyAction::Clock { at } if at < expires_t => {
                return Ok((SurveyStatus::Pending, Vec::new()));
            }
            // Deadline passed, whatever the action was.
            _ => (
                SurveyStatus::Expired,
                Some(self.event(EventKind::SurveyExpired, expires_t)),
            ),
        };
        self.instances[idx].status = status;
        Ok((status, event.into_iter().collect()))
    }
}
