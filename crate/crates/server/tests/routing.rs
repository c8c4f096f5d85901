mod common;

use common::{reparse, Fixture};
use marcskos_server::{Request, Response};

fn get(fixture: &Fixture, target: &str, accept: Option<&str>) -> Response {
    let mut request = Request::new("GET", target);
    if let Some(a) = accept {
        request = request.with_header("Accept", a);
    }
    fixture.service().handle(&request)
}

fn body_text(response: Response) -> String {
    String::from_utf8(response.into_bytes().unwrap()).unwrap()
}

#[test]
fn negotiated_representations() {
    let f = Fixture::new();
    let want = f.description("sh85148236");
    let cases = [
        (Some("application/rdf+xml"), "application/rdf+xml"),
        (Some("text/n3"), "text/n3"),
        (Some("text/rdf+n3"), "text/n3"),
        (Some("application/xhtml+xml"), "application/xhtml+xml"),
        (Some("text/html"), "application/xhtml+xml"),
        (Some("application/json"), "application/json"),
        (Some("*/*"), "application/xhtml+xml"),
        (None, "application/xhtml+xml"),
        (Some("text/html;q=0.2, application/json;q=0.9"), "application/json"),
    ];
    for (accept, media) in cases {
        let response = get(&f, "/sh85148236", accept);
        assert_eq!(response.status, 200, "{accept:?}");
        assert_eq!(response.header_value("Content-Type"), Some(media), "{accept:?}");
        assert_eq!(response.header_value("Vary"), Some("Accept"));
        assert_eq!(reparse(media, &body_text(response)), want, "{accept:?}");
    }
}

#[test]
fn extension_beats_accept() {
    let f = Fixture::new();
    for (ext, media) in [
        ("rdf", "application/rdf+xml"),
        ("n3", "text/n3"),
        ("json", "application/json"),
        ("html", "application/xhtml+xml"),
    ] {
        let response = get(&f, &format!("/sh85148236.{ext}"), Some("text/n3;q=0, image/png"));
        assert_eq!(response.status, 200);
        assert_eq!(response.header_value("Content-Type"), Some(media));
        assert_eq!(response.header_value("Vary"), None);
        assert_eq!(reparse(media, &body_text(response)), f.description("sh85148236"));
    }
    let response = get(&f, "/sh85148236.json", Some("text/n3"));
    assert_eq!(response.header_value("Content-Type"), Some("application/json"));
}

#[test]
fn client_errors() {
    let f = Fixture::new();
    assert_eq!(get(&f, "/nosuch999999", None).status, 404);
    assert_eq!(get(&f, "/sh99999999", None).status, 404);
    assert_eq!(get(&f, "/sh85148236.xml", None).status, 404);
    assert_eq!(get(&f, "/sh85148236.nt", None).status, 404);
    assert_eq!(get(&f, "/", None).status, 404);
    assert_eq!(get(&f, "/sh85148236/extra", None).status, 404);

    let response = get(&f, "/sh85148236", Some("image/png"));
    assert_eq!(response.status, 406);
    let text = body_text(response);
    assert!(text.contains("application/rdf+xml") && text.contains("text/n3"), "{text}");

    let post = f.service().handle(&Request::new("POST", "/sh85148236"));
    assert_eq!(post.status, 405);
    assert_eq!(post.header_value("Allow"), Some("GET, HEAD"));
}

#[test]
fn head_mirrors_get() {
    let f = Fixture::new();
    let service = f.service();
    for target in ["/sh85148236", "/sh85148236.rdf", "/label?q=Drama", "/data.nt", "/nosuch999999", "/"] {
        let get = service.handle(&Request::new("GET", target));
        let head = service.handle(&Request::new("HEAD", target));
        assert_eq!(head.status, get.status, "{target}");
        assert_eq!(head.headers, get.headers, "{target}");
        assert!(head.into_bytes().unwrap().is_empty());
    }
}

#[test]
fn etag_validation() {
    let f = Fixture::new();
    let service = f.service();
    let first = service.handle(&Request::new("GET", "/sh85148236").with_header("Accept", "text/n3"));
    let etag = first.header_value("ETag").unwrap().to_owned();
    let again = service.handle(
        &Request::new("GET", "/sh85148236")
            .with_header("Accept", "text/n3")
            .with_header("If-None-Match", &etag),
    );
    assert_eq!(again.status, 304);
    assert!(again.into_bytes().unwrap().is_empty());
    // A different representation has a different tag.
    let json = service.handle(
        &Request::new("GET", "/sh85148236.json").with_header("If-None-Match", &etag),
    );
    assert_eq!(json.status, 200);
    assert_ne!(json.header_value("ETag"), Some(etag.as_str()));
}

#[test]
fn label_endpoint() {
    let f = Fixture::new();
    let found: Vec<String> =
        serde_json::from_str(&body_text(get(&f, "/label?q=World+Wide+Web", None))).unwrap();
    assert_eq!(found, ["http://lcsh.info/sh85148236#concept"]);
    let encoded: Vec<String> =
        serde_json::from_str(&body_text(get(&f, "/label?q=Drama--17th%20century", None))).unwrap();
    assert_eq!(encoded, ["http://lcsh.info/sh85039397#concept"]);
    for q in ["/label?q=world+wide+web", "/label?q=", "/label"] {
        let response = get(&f, q, None);
        assert_eq!(response.status, 200);
        assert_eq!(response.header_value("Content-Type"), Some("application/json"));
        assert_eq!(body_text(response), "[]");
    }
}

#[test]
fn full_dump_streams_every_triple() {
    let f = Fixture::new();
    let response = get(&f, "/data.nt", None);
    assert_eq!(response.status, 200);
    assert_eq!(response.header_value("Content-Type"), Some("application/n-triples"));
    assert!(matches!(response.body, marcskos_server::Body::Stream(_)));
    let text = body_text(response);
    let want: marcskos_oracles::Statements = f.conversion.graph.iter().map(common::statement).collect();
    assert_eq!(reparse("application/n-triples", &text), want);
}

#[test]
fn xhtml_links_carry_target_labels() {
    let f = Fixture::new();
    let page = body_text(get(&f, "/sh85148236.html", None));
    assert!(
        page.contains(r#"<a rel="skos:broader" href="http://lcsh.info/sh93000202#concept">Hypermedia</a>"#),
        "{page}"
    );
}
