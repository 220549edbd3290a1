//! Builds the intent prompt for a benchmark sample and parses a canned
//! reply. With `--live <url>` and DRAGFLOW_INTENT_API_KEY set it sends the
//! request to that chat-completion endpoint instead.
//!
//! cargo run -p dragflow-intent --example intent_prompt

use std::io::Cursor;
use std::path::PathBuf;

use dragflow_core::benchio::{load_masks, parse_sample, sample_region_ops};
use dragflow_core::overlay::render_ops_at;
use dragflow_intent::{build_prompt, parse_response, request_intent, EndpointConfig, IntentRequest};

fn png(img: &image::RgbImage) -> Vec<u8> {
    let mut buf = Cursor::new(Vec::new());
    img.write_to(&mut buf, image::ImageFormat::Png).expect("in-memory png");
    buf.into_inner()
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let dir = manifest.join("../core/fixtures/red/sample_a");
    let sample = parse_sample(&std::fs::read_to_string(dir.join("instructions.json"))?)?;
    let ops = sample_region_ops(&sample, &load_masks(&dir, &sample)?)?;
    let original = image::open(dir.join("image.png"))?.to_rgb8();
    let overlay = render_ops_at(Some(&original), &ops, 1, 1)?;
    let request = IntentRequest {
        original_png: png(&original),
        overlay_png: png(&overlay),
        prompt: build_prompt(&sample),
    };
    println!("{}\n", request.prompt);

    let args: Vec<String> = std::env::args().collect();
    let result = match args.iter().position(|a| a == "--live") {
        Some(i) => {
            let url = args.get(i + 1).ok_or_else(|| anyhow::anyhow!("--live needs a URL"))?;
            let config = EndpointConfig {
                url: url.clone(),
                ..EndpointConfig::default()
            };
            request_intent(&config, &request).await?
        }
        None => parse_response(include_str!("../fixtures/responses/rotation_ten.txt"))?,
    };
    println!("label: {}", result.label);
    for (i, c) in result.candidates.iter().enumerate() {
        println!("{:>2}. {c}", i + 1);
    }
    Ok(())
}
