mod common;

use anhinga_core::session::{replay_log, replay_log_with_budget, SessionEvent};
use anhinga_core::{serialize_level, Command, Condition, SearchBudget, Session, SessionError, SessionLog};
use common::*;

#[test]
fn exported_logs_replay_byte_identically() {
    let mut rng = rng(41);
    let budget = SearchBudget::new(5_000).unwrap();
    let mut applied = 0;
    for i in 0..60 {
        let condition = if i % 2 == 0 { Condition::Full } else { Condition::Half };
        let (session, _) = scripted_session(&mut rng, condition, 40);
        let text = session.export_log().to_jsonl();
        let log = SessionLog::from_jsonl(&text).unwrap();
        let replayed = replay_log_with_budget(&log, budget).unwrap();
        assert_eq!(serialize_level(replayed.level()), serialize_level(session.level()));
        assert_eq!(replayed.snapshot(), session.snapshot());
        assert_eq!(replayed.export_log().to_jsonl(), text);
        applied += log
            .records
            .iter()
            .filter(|r| matches!(r.event, SessionEvent::Edit { changed: true, .. }))
            .count();
    }
    assert!(applied > 100, "only {applied} edits changed a level");
}

#[test]
fn half_sessions_never_send_gradient_cells() {
    let mut rng = rng(42);
    let (mut full_cells, mut half_cells) = (0, 0);
    for _ in 0..20 {
        full_cells += scripted_session(&mut rng, Condition::Full, 60).1;
        half_cells += scripted_session(&mut rng, Condition::Half, 60).1;
    }
    assert_eq!(half_cells, 0);
    assert!(full_cells > 0);
}

#[test]
fn half_session_gradient_is_disabled() {
    let mut session = Session::new(&fixture_text("shortcut"), Condition::Half).unwrap();
    assert_eq!(session.poll_gradient(100), Err(SessionError::ConditionDisabled));
    session
        .command(
            Command::Edit {
                cell: anhinga_core::Cell::new(2, 1),
                selected: None,
            },
            10,
        )
        .unwrap();
    assert_eq!(session.readout().length, Some(4));
    assert_eq!(session.poll_gradient(100), Err(SessionError::ConditionDisabled));
}

#[test]
fn full_session_sweep_restarts_on_edit() {
    let mut session = Session::new(&fixture_text("shortcut"), Condition::Full).unwrap();
    let first = session.poll_gradient(5).unwrap();
    assert_eq!((first.start, first.cells.len(), first.restarted), (0, 5, false));
    session
        .command(
            Command::Edit {
                cell: anhinga_core::Cell::new(2, 1),
                selected: None,
            },
            10,
        )
        .unwrap();
    let after = session.poll_gradient(1000).unwrap();
    assert!(after.restarted);
    assert_eq!(after.start, 0);
    assert!(after.done);
    assert_eq!(after.cells.len(), after.total);
    assert_eq!(after.generation, first.generation + 1);
    assert!(!session.poll_gradient(1).unwrap().restarted);
}

#[test]
fn rejected_commands_are_not_logged() {
    let mut session = Session::new(&fixture_text("corridor"), Condition::Full).unwrap();
    assert_eq!(session.command(Command::Undo, 5), Err(SessionError::EmptyHistory));
    let bird_cell = session.level().head();
    assert!(session
        .command(
            Command::Edit {
                cell: bird_cell,
                selected: None
            },
            6
        )
        .is_err());
    assert_eq!(session.export_log().records.len(), 1);
}

#[test]
fn replay_rejects_logs_without_load() {
    let mut log = Session::new(&fixture_text("corridor"), Condition::Full)
        .unwrap()
        .export_log();
    log.records[0].event = SessionEvent::Reset;
    assert!(matches!(replay_log(&log), Err(SessionError::Replay { index: 0, .. })));
}
