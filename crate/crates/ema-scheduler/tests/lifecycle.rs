//! Whole-day lifecycle properties: slot structure across many seeded days,
//! the single-pending-activity rule under random notification streams, and
//! terminality of every instance by end of day plus one expiry period.

use proptest::prelude::*;
use std::collections::BTreeMap;

use ema_scheduler::{
    plan_random_surveys, CollectionWindow, EmaScheduler, EventKind, EventRecord, SurveyAction,
    SurveyKind, SurveyStatus,
};

#[test]
fn thousand_seeded_days_have_one_slot_per_block() {
    let w = CollectionWindow::default();
    for seed in 0..250u64 {
        for day in 0..4u32 {
            let t = plan_random_surveys(day, seed, &w).unwrap();
            assert!(t[0] >= 27_000.0 && t[0] < 43_200.0);
            assert!(t[1] >= 43_200.0 && t[1] < 61_200.0);
            assert!(t[2] >= 61_200.0 && t[2] < 77_400.0);
        }
    }
}

fn count_kind(events: &[EventRecord], kind: EventKind) -> usize {
    events.iter().filter(|e| e.event_kind == kind).count()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// Random MVPA notification streams and participant behaviors: at most
    /// one pending activity survey at any instant, every instance terminal
    /// by end of day + 30 min, and each transition producing exactly one
    /// event record.
    #[test]
    fn day_simulation_upholds_lifecycle_invariants(
        seed in 0u64..100_000,
        mvpa_count in 0usize..40,
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut s = EmaScheduler::new("p", "ph", CollectionWindow::default(), seed).unwrap();
        s.begin_day(0.0, 0, seed).unwrap();

        let mut times: Vec<f64> = (0..mvpa_count)
            .map(|_| rng.random_range(20_000.0..80_000.0))
            .collect();
        times.sort_by(f64::total_cmp);

        let mut events: Vec<EventRecord> = Vec::new();
        let mut t_cursor = 0.0;
        for t in times {
            while t_cursor < t {
                t_cursor = (t_cursor + 300.0).min(t);
                events.extend(s.tick(t_cursor));
            }
            let (id, evs) = s.on_mvpa_notification(t);
            events.extend(evs);
            prop_assert!(
                s.pending().filter(|i| i.kind == SurveyKind::Activity).count() <= 1,
                "more than one pending activity survey"
            );
            if let Some(id) = id {
                match rng.random_range(0..3u8) {
                    0 => {
                        let mut resp = BTreeMap::new();
                        resp.insert("mood".into(), serde_json::json!(3));
                        let (_, ev) = s
                            .resolve(id, SurveyAction::Complete { at: t + 60.0, responses: resp })
                            .unwrap();
                        events.extend(ev);
                    }
                    1 => {
                        let (_, ev) =
                            s.resolve(id, SurveyAction::Decline { at: t + 120.0 }).unwrap();
                        events.extend(ev);
                    }
                    _ => {} // leave pending; the clock will expire it
                }
            }
        }
        // Run out the day plus one expiry period.
        let mut t = t_cursor;
        while t < 86_400.0 + 1800.0 {
            t += 300.0;
            events.extend(s.tick(t));
        }

        let n = s.instances().len();
        for inst in s.instances() {
            prop_assert!(inst.status.is_terminal(), "instance still pending at day end");
            prop_assert_eq!(inst.expires_t, inst.triggered_t + 1800.0);
            prop_assert_eq!(
                inst.responses.is_some(),
                inst.status == SurveyStatus::Completed,
                "responses present iff completed"
            );
        }
        // The day always schedules exactly 3 random surveys.
        prop_assert_eq!(
            s.instances().iter().filter(|i| i.kind == SurveyKind::Random).count(),
            3
        );
        // One trigger per instance, one notification per delivered instance,
        // and exactly one terminal transition each.
        prop_assert_eq!(count_kind(&events, EventKind::SurveyTriggered), n);
        prop_assert_eq!(
            count_kind(&events, EventKind::SurveyNotified),
            n - s.counters().skipped_slots as usize
        );
        let terminal = count_kind(&events, EventKind::SurveyCompleted)
            + count_kind(&events, EventKind::SurveyDeclined)
            + count_kind(&events, EventKind::SurveyExpired);
        prop_assert_eq!(terminal, n);
        // All events carry the full identity tuple.
        for e in &events {
            prop_assert!(!e.participant_id.is_empty());
            prop_assert!(!e.phone_id.is_empty());
            prop_assert!(e.timestamp.is_finite());
            prop_assert!(!e.local_time.is_empty());
        }
    }
}

#[test]
fn random_surveys_fire_even_while_activity_survey_pending() {
    // The two kinds are independent queues.
    let mut s = EmaScheduler::new("p", "ph", CollectionWindow::default(), 5).unwrap();
    let slots = s.begin_day(0.0, 0, 12345).unwrap();
    // Activity survey pending right before the first slot.
    s.on_mvpa_notification(slots[0] - 10.0).0.unwrap();
    s.tick(slots[0]);
    let pending: Vec<SurveyKind> = s.pending().map(|i| i.kind).collect();
    assert!(pending.contains(&SurveyKind::Activity));
    assert!(pending.contains(&SurveyKind::Random));
    assert_eq!(pending.len(), 2);
}
