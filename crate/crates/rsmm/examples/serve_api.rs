//! Starts the HTTP API on an ephemeral port, queries it once, and stops.
//!
//!     cargo run --example serve_api

use std::io::{Read, Write};
use std::net::TcpStream;

use rsmm::assessment::AssessmentStore;
use rsmm::evidence::default_rules;
use rsmm::model::bundled_rsmm;
use rsmm::service::{router, serve, ServiceConfig};

fn get(addr: std::net::SocketAddr, path: &str) -> String {
    let mut stream = TcpStream::connect(addr).unwrap();
    write!(
        stream,
        "GET {path} HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\n\r\n"
    )
    .unwrap();
    let mut out = String::new();
    stream.read_to_string(&mut out).unwrap();
    out
}

#[tokio::main]
async fn main() {
    let dir = std::env::temp_dir().join(format!("rsmm-serve-example-{}", std::process::id()));
    AssessmentStore::open(&dir)
        .unwrap()
        .save(&rsmm::case_study::ggir(), None)
        .unwrap();
    let app = router(ServiceConfig::new(bundled_rsmm(), &dir, default_rules())).unwrap();
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let (stop, stopped) = tokio::sync::oneshot::channel::<()>();
    let server = tokio::spawn(serve(listener, app, async {
        let _ = stopped.await;
    }));
    println!("listening on http://{addr}");

    let response = tokio::task::spawn_blocking(move || get(addr, "/api/v1/assessments"))
        .await
        .unwrap();
    println!("{}", response.lines().next().unwrap_or(""));
    println!("{}", response.split("\r\n\r\n").nth(1).unwrap_or(""));

    let _ = stop.send(());
    server.await.unwrap().unwrap();
    let _ = std::fs::remove_dir_all(&dir);
}
