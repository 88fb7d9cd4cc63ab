using System.Collections;
using UnityEngine;

public class EnemyPatrol : MonoBehaviour
{
    private enum State { Patrol, Chase, Wait }

    [SerializeField] private Transform[] waypoints;
    [SerializeField] private float speed = 2.5f;
    [SerializeField] private float sightRange = 6f;

    private State state = State.Patrol;
    private int index;
    private Transform target;

    private void Start()
    {
        var player = GameObject.FindWithTag("Player");
        target = player != null ? player.transform : null;
        StartCoroutine(Think());
    }

    private IEnumerator Think()
    {
        while (true)
        {
            state = target != null && Vector3.Distance(transform.position, target.position) < sightRange
                ? State.Chase
                : State.Patrol;
            yield return new WaitForSeconds(0.25f);
        }
    }

    private void Update()
    {
        Vector3 goal = state switch
        {
            State.Chase => target.position,
            State.Patrol when waypoints.Length > 0 => waypoints[index].position,
            _ => transform.position,
        };
        transform.position = Vector3.MoveTowards(transform.position, goal, speed * Time.deltaTime);
        if (state == State.Patrol && waypoints.Length > 0 && transform.position == goal)
        {
            index = (index + 1) % waypoints.Length;
        }
    }
}
