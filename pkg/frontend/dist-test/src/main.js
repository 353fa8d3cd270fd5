import { ApiClient } from './api.js';
import { ReviewStore } from './state.js';
import { ReviewApp } from './ui.js';
async function boot() {
    const root = document.getElementById('app');
    if (!root)
        throw new Error('missing #app container');
    const assessor = window.localStorage.getItem('assessor') ??
        window.prompt('Your assessor name:', 'anonymous') ??
        'anonymous';
    window.localStorage.setItem('assessor', assessor);
    const api = new ApiClient('', (url, init) => fetch(url, init));
    const store = new ReviewStore(api, assessor);
    const app = new ReviewApp(store, root);
    const documents = await api.documents();
    await app.start(documents);
}
void boot();
