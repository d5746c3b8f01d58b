//! A real server on an ephemeral localhost port and a thin JSON client.
#![allow(dead_code)]

use reqwest::StatusCode;
use serde_json::{json, Value};
use stand::service::{router, AppState};

pub struct Server {
    pub base: String,
    pub client: reqwest::Client,
    handle: tokio::task::JoinHandle<()>,
}

impl Drop for Server {
    fn drop(&mut self) {
        self.handle.abort();
    }
}

impl Server {
    pub async fn start(app: AppState) -> Self {
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
        let base = format!("http://{}", listener.local_addr().unwrap());
        let handle = tokio::spawn(async move {
            axum::serve(listener, router(app)).await.unwrap();
        });
        Server { base, client: reqwest::Client::new(), handle }
    }

    pub async fn post(&self, path: &str, body: &Value) -> (StatusCode, Value) {
        let r = self.client.post(format!("{}{path}", self.base)).json(body).send().await.unwrap();
        (r.status(), r.json().await.unwrap())
    }

    pub async fn post_raw(&self, path: &str, body: &'static str) -> (StatusCode, Value) {
        let r = self
            .client
            .post(format!("{}{path}", self.base))
            .header("content-type", "application/json")
            .body(body)
            .send()
            .await
            .unwrap();
        (r.status(), r.json().await.unwrap())
    }

    pub async fn get(&self, path: &str) -> (StatusCode, Value) {
        let r = self.client.get(format!("{}{path}", self.base)).send().await.unwrap();
        (r.status(), r.json().await.unwrap())
    }

    /// Creates a session and returns its id.
    pub async fn create(&self, body: &Value) -> String {
        let (status, v) = self.post("/sessions", body).await;
        assert_eq!(status, StatusCode::CREATED, "{v}");
        v["id"].as_str().unwrap().to_string()
    }

    pub async fn label(&self, id: &str, values: &[u32], label: bool) -> Value {
        let (status, v) = self.post(&format!("/sessions/{id}/labels"), &json!({ "values": values, "label": label })).await;
        assert_eq!(status, StatusCode::OK, "{v}");
        v
    }

    pub async fn state(&self, id: &str) -> Value {
        let (status, v) = self.get(&format!("/sessions/{id}/state")).await;
        assert_eq!(status, StatusCode::OK, "{v}");
        v
    }
}

pub fn binary_schema(n: usize) -> Value {
    let features: Vec<Value> = (1..=n).map(|i| json!({ "name": format!("X{i}"), "domain": ["0", "1"] })).collect();
    json!({ "features": features })
}

/// Thirty labels over eight binary features, labeled by
/// `(X1 and X2) or (X3 and not X5)`, in a fixed pseudo-random order.
pub fn scripted_labels() -> Vec<(Vec<u32>, bool)> {
    let mut state = 0x2545_f491_4f6c_dd1du64;
    (0..30)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            let x: Vec<u32> = (0..8).map(|b| (state >> b & 1) as u32).collect();
            let label = (x[0] == 1 && x[1] == 1) || (x[2] == 1 && x[4] == 0);
            (x, label)
        })
        .collect()
}
