//! Starts the service on an ephemeral loopback port, previews a drag,
//! submits it as a job and polls until it finishes.
//!
//! cargo run --release -p dragflow-service --example local_job

use std::time::Duration;

use dragflow_core::synthetic::drag_suite;
use dragflow_service::{serve, AppState};
use serde_json::{json, Value};

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    let (tx, rx) = tokio::sync::oneshot::channel();
    tokio::spawn(serve("127.0.0.1:0".parse()?, AppState::new(2, None), move |addr| {
        let _ = tx.send(addr);
    }));
    let base = format!("http://{}", rx.await?);
    let http = reqwest::Client::new();
    let case = drag_suite()?.into_iter().find(|c| c.name == "rotate-1").expect("suite has rotate-1");

    let preview: Value = http
        .post(format!("{base}/preview"))
        .json(&json!({"ops": [case.op], "k": 25}))
        .send()
        .await?
        .json()
        .await?;
    println!("preview at k=25: {}", preview["params"][0]);

    let submitted: Value = http
        .post(format!("{base}/jobs"))
        .json(&json!({"z0": case.z0, "ops": [case.op]}))
        .send()
        .await?
        .json()
        .await?;
    let id = submitted["id"].as_str().expect("job id").to_string();
    println!("submitted {id}");
    loop {
        let rec: Value = http.get(format!("{base}/jobs/{id}")).send().await?.json().await?;
        let status = rec["status"].as_str().unwrap_or("?").to_string();
        let track = rec["centroid_trajectory"][0].as_array().and_then(|t| t.last().cloned());
        println!(
            "{status:>8} {}/{} tracked at {}",
            rec["progress"]["iteration"], rec["progress"]["total"], track.unwrap_or(Value::Null)
        );
        if status == "done" || status == "failed" {
            break;
        }
        tokio::time::sleep(Duration::from_millis(5)).await;
    }
    Ok(())
}
