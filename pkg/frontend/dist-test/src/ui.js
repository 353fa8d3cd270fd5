// DOM layer: renders the document list, the judgeable queue beside its
// source excerpts, the missed-entity form, and the metrics panel. All state
// transitions go through the ReviewStore.
function el(tag, className = '', text = '') {
    const node = document.createElement(tag);
    if (className)
        node.className = className;
    if (text)
        node.textContent = text;
    return node;
}
export class ReviewApp {
    constructor(store, root) {
        this.store = store;
        this.root = root;
        this.selected = 0;
    }
    async start(documents) {
        this.renderShell(documents);
        if (documents.length > 0) {
            await this.openDocument(documents[0].id);
        }
        document.addEventListener('keydown', (event) => this.onKey(event));
    }
    renderShell(documents) {
        this.root.innerHTML = '';
        const sidebar = el('nav', 'sidebar');
        sidebar.appendChild(el('h2', '', 'Documents'));
        for (const doc of documents) {
            const button = el('button', 'doc-link', `${doc.id} (${doc.entities}e/${doc.triplets}t)`);
            button.addEventListener('click', () => void this.openDocument(doc.id));
            sidebar.appendChild(button);
        }
        const main = el('main', 'main');
        main.appendChild(el('section', 'queue'));
        main.appendChild(el('section', 'missed'));
        main.appendChild(el('aside', 'metrics'));
        this.root.appendChild(sidebar);
        this.root.appendChild(main);
        const banner = el('div', 'offline-banner', 'offline: verdicts queued locally');
        banner.style.display = 'none';
        this.root.appendChild(banner);
        window.addEventListener('online', () => void this.reconnect());
    }
    async openDocument(documentId) {
        await this.store.loadDocument(documentId);
        await this.store.refreshMetrics();
        this.selected = 0;
        this.render();
    }
    async reconnect() {
        if (this.store.outbox.length > 0) {
            await this.store.flushOutbox();
            this.render();
        }
    }
    render() {
        this.renderQueue();
        this.renderMissedForm();
        this.renderMetrics();
        const banner = this.root.querySelector('.offline-banner');
        if (banner)
            banner.style.display = this.store.online ? 'none' : 'block';
    }
    renderQueue() {
        const queue = this.root.querySelector('.queue');
        if (!queue)
            return;
        queue.innerHTML = '';
        queue.appendChild(el('h2', '', `Review: ${this.store.documentId}`));
        if (this.store.items.length === 0) {
            queue.appendChild(el('p', 'empty-state', 'Nothing to review in this document.'));
            return;
        }
        this.store.items.forEach((item, index) => {
            queue.appendChild(this.renderItem(item, index));
        });
    }
    renderItem(item, index) {
        const card = el('article', `card ${item.verdictState}${index === this.selected ? ' selected' : ''}`);
        card.appendChild(el('h3', '', item.title));
        card.appendChild(el('p', 'detail', item.detail));
        if (item.missingDescription) {
            card.appendChild(el('p', 'warning', 'predicate description is missing'));
        }
        const excerpt = el('blockquote', 'excerpt', item.excerpt);
        card.appendChild(excerpt);
        const controls = el('div', 'controls');
        const correct = el('button', 'correct', 'correct (y)');
        const incorrect = el('button', 'incorrect', 'incorrect (n)');
        const inferred = el('label', 'inferred-toggle');
        const checkbox = el('input');
        checkbox.type = 'checkbox';
        checkbox.checked = item.inferred === true;
        // invariant: the toggle is enabled only while a correct verdict is in play
        checkbox.disabled = !this.store.canMarkInferred(item, 'correct') || item.verdictState !== 'correct';
        inferred.appendChild(checkbox);
        inferred.appendChild(document.createTextNode(' from model knowledge (i)'));
        correct.addEventListener('click', () => void this.judge(item, 'correct'));
        incorrect.addEventListener('click', () => void this.judge(item, 'incorrect'));
        checkbox.addEventListener('change', () => void this.judge(item, 'correct', checkbox.checked));
        controls.appendChild(correct);
        controls.appendChild(incorrect);
        controls.appendChild(inferred);
        card.appendChild(controls);
        card.addEventListener('click', () => {
            this.selected = index;
            this.render();
        });
        return card;
    }
    async judge(item, verdict, inferred) {
        const flag = verdict === 'correct' && this.store.canMarkInferred(item, verdict) ? inferred : undefined;
        await this.store.submitVerdict(item, verdict, flag);
        this.render();
    }
    renderMissedForm() {
        const section = this.root.querySelector('.missed');
        if (!section)
            return;
        section.innerHTML = '';
        section.appendChild(el('h2', '', 'Missed entities'));
        if (this.store.qualifyingTypes.length === 0) {
            section.appendChild(el('p', 'empty-state', 'No type has two or more entities in this document.'));
            return;
        }
        const select = el('select');
        for (const typeLabel of this.store.qualifyingTypes) {
            const option = el('option', '', typeLabel);
            option.value = typeLabel;
            select.appendChild(option);
        }
        const input = el('input');
        input.placeholder = 'missed labels, separated by ;';
        const submit = el('button', '', 'record missed entities');
        submit.addEventListener('click', () => {
            const labels = input.value.split(';').map((s) => s.trim()).filter(Boolean);
            if (labels.length > 0) {
                void this.store.submitMissedEntities(select.value, labels).then(() => {
                    input.value = '';
                    this.render();
                });
            }
        });
        section.appendChild(select);
        section.appendChild(input);
        section.appendChild(submit);
    }
    renderMetrics() {
        const panel = this.root.querySelector('.metrics');
        if (!panel)
            return;
        panel.innerHTML = '';
        panel.appendChild(el('h2', '', 'Metrics'));
        const metrics = this.store.metrics;
        if (!metrics) {
            panel.appendChild(el('p', 'empty-state', 'No metrics yet.'));
            return;
        }
        const table = el('table');
        for (const [name, value] of Object.entries(metrics.percentages)) {
            const row = el('tr');
            row.appendChild(el('td', '', name.replace(/_/g, ' ')));
            row.appendChild(el('td', 'num', value.toFixed(2)));
            table.appendChild(row);
        }
        panel.appendChild(table);
        const pending = this.store.pendingCounts();
        panel.appendChild(el('p', 'pending', `pending: ${Object.entries(pending)
            .map(([kind, count]) => `${kind} ${count}`)
            .join(', ')} | completeness ${metrics.completeness_pct.toFixed(1)}%`));
    }
    onKey(event) {
        const pending = this.store.items;
        if (pending.length === 0)
            return;
        const item = pending[Math.min(this.selected, pending.length - 1)];
        if (event.key === 'j') {
            this.selected = Math.min(this.selected + 1, pending.length - 1);
            this.render();
        }
        else if (event.key === 'k') {
            this.selected = Math.max(this.selected - 1, 0);
            this.render();
        }
        else if (event.key === 'y') {
            void this.judge(item, 'correct');
        }
        else if (event.key === 'n') {
            void this.judge(item, 'incorrect');
        }
        else if (event.key === 'i' && item.verdictState === 'correct') {
            void this.judge(item, 'correct', !(item.inferred === true));
        }
    }
}
