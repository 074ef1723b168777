//! With no external backends configured, the server opens no connections of
//! its own during the annotate → train → infer → eval loop.
//!
//! The counters are namespace-wide, so this binary runs its tests one at a
//! time (see the lock below).

mod common;

use std::sync::Mutex;

use common::e2e::{control_run, privacy_run};

static SERIAL: Mutex<()> = Mutex::new(());

#[test]
fn full_loop_makes_no_outbound_connections() {
    let _serial = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let dir = tempfile::tempdir().unwrap();
    let report = privacy_run(dir.path()).unwrap();
    assert_eq!(report.outcome.predictions, 16);
    assert_eq!(
        report.tcp_active_opens, report.client_connections,
        "every TCP connect must be one of the test client's"
    );
    assert_eq!(report.udp_datagrams, 0, "no UDP (DNS) traffic");
    assert_eq!(report.proxy_hits, 0);
    assert!(report.clean());
}

// the same measurement notices a configured backend being contacted
#[test]
fn harness_detects_a_backend_connection() {
    let _serial = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let dir = tempfile::tempdir().unwrap();
    let (opens, client) = control_run(dir.path()).unwrap();
    assert!(opens > client, "{opens} connects vs {client} from the client");
}
