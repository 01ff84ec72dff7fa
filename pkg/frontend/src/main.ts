import { Client } from './api.js';
import { Viewer } from './viewer.js';

const root = document.getElementById('app');
if (!root) throw new Error('missing #app element');
new Viewer(root, new Client(''));
