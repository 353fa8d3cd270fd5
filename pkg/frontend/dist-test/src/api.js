// Thin client over the review API. The fetch implementation is injected so
// tests can run without a browser or a live server.
export class ApiError extends Error {
    constructor(status, message) {
        super(message);
        this.status = status;
    }
}
async function unwrap(response) {
    const body = (await response.json());
    if (response.status >= 400) {
        throw new ApiError(response.status, body.error ?? `request failed (${response.status})`);
    }
    return body;
}
export class ApiClient {
    constructor(base, fetchImpl) {
        this.base = base;
        this.fetchImpl = fetchImpl;
    }
    get(path) {
        return this.fetchImpl(this.base + path);
    }
    post(path, payload) {
        return this.fetchImpl(this.base + path, {
            method: 'POST',
            headers: { 'Content-Type': 'application/json' },
            body: JSON.stringify(payload),
        });
    }
    async documents() {
        return unwrap(await this.get('/api/documents'));
    }
    async components(documentId) {
        return unwrap(await this.get(`/api/documents/${encodeURIComponent(documentId)}/components`));
    }
    async metrics() {
        return unwrap(await this.get('/api/metrics'));
    }
    async submitAnnotation(record) {
        await unwrap(await this.post('/api/annotations', record));
    }
    async submitGroundTruth(record) {
        await unwrap(await this.post('/api/ground-truth', record));
    }
}
