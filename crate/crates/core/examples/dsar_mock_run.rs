//! Run an access-request descriptor against the scripted mock site, pause
//! on a wait budget and resume from the saved session.
//!
//!     cargo run -p transparency-core --example dsar_mock_run

use std::fs;

use transparency_core::dsar::{execute, validate_descriptor, DsarSession, ExecuteOptions, Identity, MockDriver, MockFixture, SiteDriver, VirtualClock};

fn main() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/dsar");
    let read = |name: &str| fs::read_to_string(format!("{dir}/{name}")).unwrap();
    let descriptor = validate_descriptor(&read("twitter.dara.json")).unwrap();
    let fixture = MockFixture::parse(&read("twitter.mock.json")).unwrap();
    let identity: Identity = serde_json::from_str(&read("identity.json")).unwrap();
    let out = std::env::temp_dir().join("dsar-example");

    // one hour of waiting allowed: the run stops at the polling step
    let options = ExecuteOptions { artifact_dir: out.clone(), wait_budget: Some(3600) };
    let mut driver = MockDriver::new(fixture.clone());
    let paused = execute(&descriptor, &mut driver, &identity, &mut VirtualClock::default(), &options, None).unwrap();
    println!("first run: {:?} at step {} after {} driver calls", paused.status, paused.step_index, driver.call_log().len());

    let saved = serde_json::to_string(&paused).unwrap();
    let session: DsarSession = serde_json::from_str(&saved).unwrap();
    let mut driver = MockDriver::new(fixture);
    let done = execute(&descriptor, &mut driver, &identity, &mut VirtualClock::default(), &options, Some(session)).unwrap();
    println!("resumed:   {:?}, calls {:?}", done.status, driver.call_log());
    for a in &done.artifacts {
        println!("artifact   {} ({} bytes) at {}", a.name, a.byte_length, a.local_path.display());
    }
}
